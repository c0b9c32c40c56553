#include "gridbrake/builtins.hpp"
#include "gridbrake/engine.hpp"
#include "gridbrake/error.hpp"
#include "gridbrake/io.hpp"
#include "gridbrake/plot.hpp"
#include "gridbrake/small_signal.hpp"
#include "gridbrake/swing.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace gridbrake;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kNumeric = 2;

std::string csv_string(const std::function<void(std::ostream&)>& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

struct SimulateArgs {
    std::string scenario;
    std::string out;
    std::optional<double> dt;
    std::optional<double> horizon;
    bool plot = false;
};

int cmd_simulate(const SimulateArgs& a) {
    Scenario s = load_scenario(a.scenario);
    if (a.dt) s.simulation.dt_s = *a.dt;
    if (a.horizon) s.simulation.horizon_s = *a.horizon;
    if (a.plot) s.outputs.plot = true;
    // overrides go through the same validation as a file
    s = parse_scenario_text(serialize_scenario(s), a.scenario);

    ensure_dir(a.out);
    const fs::path dir(a.out);
    write_text_file(dir / "scenario.resolved", serialize_scenario(s));
    const SimTrace tr = run(s);
    write_text_file(dir / "trace.csv", csv_string([&](std::ostream& os) { write_trace_csv(os, tr, s.outputs.channels); }));
    write_text_file(dir / "events.csv", csv_string([&](std::ostream& os) { write_events_csv(os, tr); }));
    if (tr.size() >= 3) {
        const auto m = metrics(tr, s.simulation.frequency_band_hz);
        write_text_file(dir / "metrics.csv", csv_string([&](std::ostream& os) { write_metrics_csv(os, m); }));
    }
    if (s.outputs.plot && tr.size() > 0) {
        PlotSpec spec;
        spec.channels = s.outputs.channels;
        spec.title = s.name;
        spec.markers = event_markers(tr);
        write_text_file(dir / "plot.svg", render_trace_svg({{s.name, trace_table(tr)}}, spec));
    }
    if (tr.failed) {
        std::cerr << "simulation failed: " << tr.failure << "\n";
        return kNumeric;
    }
    std::cout << "wrote " << dir.string() << " (" << tr.size() << " samples, " << tr.events.size() << " events)\n";
    return kOk;
}

struct SweepArgs {
    std::string tmpl;
    std::string axis;
    std::vector<double> values;
    std::string out;
    std::size_t workers = 0;
};

int cmd_sweep(const SweepArgs& a) {
    const Scenario s = load_scenario(a.tmpl);
    SweepAxis axis = SweepAxis::GenerationMix;
    if (a.axis == "brake") axis = SweepAxis::BrakeSize;
    if (a.axis == "schedule") axis = SweepAxis::Schedule;
    const auto results = sweep(sweep_variants(s, axis, a.values), a.workers);
    const std::string csv = csv_string([&](std::ostream& os) { write_sweep_csv(os, results); });
    if (a.out.empty()) {
        std::cout << csv;
    } else {
        ensure_dir(a.out);
        write_text_file(fs::path(a.out) / "sweep.csv", csv);
    }
    bool any_failed = false;
    for (const auto& r : results) {
        if (!r.error.empty()) {
            std::cerr << r.label << ": " << r.error << "\n";
            any_failed = true;
        }
    }
    return any_failed ? kNumeric : kOk;
}

struct EigenArgs {
    std::string tmpl;
    std::vector<double> scr;
    std::vector<double> brake_mw;
    std::string out;
    bool plot = false;
    std::size_t workers = 0;
};

int cmd_eigen(const EigenArgs& a) {
    const Scenario s = load_scenario(a.tmpl);
    const auto scr = a.scr.empty() ? default_eigen_scr() : a.scr;
    const auto brakes = a.brake_mw.empty() ? default_eigen_brake_mw() : a.brake_mw;
    const auto points = eigen_sweep(s, scr, brakes, a.workers);
    const std::string csv = csv_string([&](std::ostream& os) { write_eigen_csv(os, points); });
    if (a.out.empty()) {
        std::cout << csv;
    } else {
        ensure_dir(a.out);
        write_text_file(fs::path(a.out) / "eigen.csv", csv);
        if (a.plot) {
            std::istringstream in(csv);
            write_text_file(fs::path(a.out) / "plot.svg", render_eigen_svg(read_csv(in), s.name));
        }
    }
    bool any_failed = false;
    for (const auto& p : points) {
        if (!p.error.empty()) {
            std::cerr << "scr " << p.scr << ", brake " << p.brake_mw << " MW: " << p.error << "\n";
            any_failed = true;
        } else {
            std::cerr << "scr " << format_double(p.scr) << ", brake " << format_double(p.brake_mw)
                      << " MW: dominant " << format_double(p.dominant.real()) << (p.dominant.imag() < 0 ? " - " : " + ")
                      << format_double(std::abs(p.dominant.imag())) << "j, " << (p.stable ? "stable" : "UNSTABLE") << "\n";
        }
    }
    return any_failed ? kNumeric : kOk;
}

struct SizeArgs {
    double delta_p_mw = 0.0;
    double h = 0.0;
    double d = 0.0;
    double target = 0.0;
    std::optional<double> brake_mw;
    double omega0 = 0.0;
    double s_base_mva = 1000.0;
    bool stages = false;
    std::optional<double> max_step_mw;
};

int cmd_size(const SizeArgs& a) {
    if (a.stages && !a.max_step_mw) throw ConfigError("--stages needs --max-step-mw");
    SystemBase base;
    base.s_base_mva = a.s_base_mva;
    base.validate();
    const double brake_mw = a.brake_mw.value_or(a.delta_p_mw);
    swing::SwingParams p{a.h, a.d, to_pu(a.delta_p_mw, base), to_pu(brake_mw, base)};
    p.validate();
    const auto sol = a.d > 0.0 ? swing::removal_time_damped(p, a.omega0, a.target)
                               : swing::removal_time_first_swing(p, a.omega0, a.target);
    std::cout << "delta_p_pu," << format_double(p.delta_p) << "\n";
    std::cout << "brake_mw," << format_double(brake_mw) << "\n";
    std::cout << "brake_pu," << format_double(p.p_br) << "\n";
    std::cout << "model," << (a.d > 0.0 ? "damped" : "first_swing") << "\n";
    std::cout << "omega_target_pu," << format_double(a.target) << "\n";
    std::cout << "reachable," << (sol.reachable ? "true" : "false") << "\n";
    if (sol.reachable) std::cout << "removal_time_s," << format_double(sol.t_removal) << "\n";
    if (a.stages) {
        const auto st = swing::allocate_stages(brake_mw, *a.max_step_mw);
        std::cout << "stages_mw";
        for (double mw : st) std::cout << ',' << format_double(mw);
        std::cout << "\n";
    }
    return kOk;
}

int cmd_list() {
    for (const auto& s : builtin_scenarios()) std::cout << s.name << "\t" << s.description << "\n";
    return kOk;
}

struct PlotArgs {
    std::vector<std::string> traces;
    std::vector<std::string> labels;
    std::vector<std::string> channels;
    std::string eigen;
    std::string title;
    std::string out;
    std::string events;
};

CsvTable read_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    return read_csv(in);
}

std::vector<PlotMarker> read_markers(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    SimTrace tr;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) continue;
        std::string detail = line.substr(c2 + 1);
        if (!detail.empty() && detail.front() == '"') detail = detail.substr(1, detail.size() - 2);
        tr.events.push_back({std::stod(line.substr(0, c1)), line.substr(c1 + 1, c2 - c1 - 1), detail});
    }
    return event_markers(tr);
}

int cmd_plot(const PlotArgs& a) {
    std::string svg;
    if (!a.eigen.empty()) {
        svg = render_eigen_svg(read_table(a.eigen), a.title);
    } else {
        if (a.traces.empty()) throw ConfigError("plot needs --trace or --eigen");
        std::vector<LabeledTable> tables;
        for (std::size_t k = 0; k < a.traces.size(); ++k) {
            const std::string label = k < a.labels.size() ? a.labels[k] : fs::path(a.traces[k]).parent_path().filename().string();
            tables.push_back({label.empty() ? a.traces[k] : label, read_table(a.traces[k])});
        }
        PlotSpec spec;
        spec.title = a.title;
        spec.channels = a.channels;
        if (spec.channels.empty()) {
            const auto& h = tables.front().table.header;
            spec.channels.assign(h.begin() + (h.empty() ? 0 : 1), h.end());
        }
        if (!a.events.empty()) spec.markers = read_markers(a.events);
        svg = render_trace_svg(tables, spec);
    }
    write_text_file(a.out, svg);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Braking-resistor and frequency-stability simulator for data-center load loss"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run one scenario into an output directory");
    simulate->add_option("--scenario", sim.scenario, "scenario file or built-in name")->required();
    simulate->add_option("--out", sim.out, "output directory")->required();
    simulate->add_option("--dt", sim.dt, "integration step (s)");
    simulate->add_option("--horizon", sim.horizon, "simulated time (s)");
    simulate->add_flag("--plot", sim.plot, "also write plot.svg");

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "run variants of a template along one axis");
    sweep_cmd->add_option("--template", sw.tmpl, "scenario file or built-in name")->required();
    sweep_cmd->add_option("--axis", sw.axis, "mix | brake | schedule")
        ->required()
        ->check(CLI::IsMember({"mix", "brake", "schedule"}));
    sweep_cmd->add_option("--values", sw.values, "comma separated values")->required()->delimiter(',');
    sweep_cmd->add_option("--out", sw.out, "output directory (default: stdout)");
    sweep_cmd->add_option("--workers", sw.workers, "parallel runs (default: GRIDBRAKE_WORKERS or all cores)");

    EigenArgs eg;
    auto* eigen = app.add_subcommand("eigen", "eigenvalues over SCR and brake size");
    eigen->add_option("--template", eg.tmpl, "scenario file or built-in name")->required();
    eigen->add_option("--scr", eg.scr, "comma separated SCR values (default 2,5)")->delimiter(',');
    eigen->add_option("--brake-mw", eg.brake_mw, "comma separated brake sizes (default 50,125,250,370,500)")
        ->delimiter(',');
    eigen->add_option("--out", eg.out, "output directory (default: stdout)");
    eigen->add_flag("--plot", eg.plot, "also write plot.svg");
    eigen->add_option("--workers", eg.workers, "parallel points");

    SizeArgs sz;
    auto* size = app.add_subcommand("size", "brake removal time and stage split from the swing equation");
    size->set_help_flag("--help", "print this help message and exit");  // frees -h for --h
    size->add_option("--delta-p-mw", sz.delta_p_mw, "tripped load (MW)")->required();
    size->add_option("--h", sz.h, "inertia constant (s)")->required();
    size->add_option("--d", sz.d, "damping (pu); 0 uses the first-swing form");
    size->add_option("--target", sz.target, "target speed deviation (pu)")->required();
    size->add_option("--brake-mw", sz.brake_mw, "brake size (MW, default = delta-p)");
    size->add_option("--omega0", sz.omega0, "speed deviation at insertion (pu)");
    size->add_option("--s-base-mva", sz.s_base_mva, "power base (MVA)");
    size->add_flag("--stages", sz.stages, "split the brake into breaker stages");
    size->add_option("--max-step-mw", sz.max_step_mw, "largest stage (MW)");

    auto* list = app.add_subcommand("list", "list built-in scenarios");

    PlotArgs pl;
    auto* plot = app.add_subcommand("plot", "render trace or eigen CSV files to SVG");
    plot->add_option("--trace", pl.traces, "trace CSV (repeatable)");
    plot->add_option("--label", pl.labels, "legend label per trace (repeatable)");
    plot->add_option("--channels", pl.channels, "channels to draw")->delimiter(',');
    plot->add_option("--events", pl.events, "events CSV for vertical markers");
    plot->add_option("--eigen", pl.eigen, "eigen CSV (complex-plane scatter)");
    plot->add_option("--title", pl.title, "plot title");
    plot->add_option("--out", pl.out, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*simulate) return cmd_simulate(sim);
        if (*sweep_cmd) return cmd_sweep(sw);
        if (*eigen) return cmd_eigen(eg);
        if (*size) return cmd_size(sz);
        if (*list) return cmd_list();
        if (*plot) return cmd_plot(pl);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    }
    return kValidation;
}
