#include "gridbrake/builtins.hpp"
#include "gridbrake/error.hpp"
#include "gridbrake/io.hpp"
#include "gridbrake/plot.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace gridbrake;
using Catch::Approx;

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) out.push_back(line);
    return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

std::size_t find_line(const std::vector<std::string>& lines, const std::string& text) {
    for (std::size_t k = 0; k < lines.size(); ++k) {
        if (lines[k] == text) return k;
    }
    FAIL("line not found: " << text);
    return 0;
}

int error_line(const std::string& text) {
    try {
        parse_scenario_text(text, "test.yaml");
    } catch (const ScenarioFileError& e) {
        return e.line();
    }
    return -1;
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
}

SimTrace small_trace() {
    SimTrace tr;
    tr.scenario_name = "tiny";
    tr.time = {0.0, 0.001, 0.002, 0.003};
    tr.channel_names = {"freq_hz", "brake_p_pu"};
    tr.channels = {{60.0, 60.1, 60.15, 60.125}, {0.0, 0.1, 0.1, 0.0}};
    tr.events = {{0.001, "breaker_closed", "brake1"}, {0.003, "note", "a, \"quoted\" detail"}};
    return tr;
}

}  // namespace

TEST_CASE("built-in catalogue") {
    const auto names = builtin_names();
    REQUIRE(names.size() == 10);
    CHECK(names.front() == "fig2_no_brake");
    CHECK(names.back() == "fig6_motor_dip");
    CHECK_FALSE(builtin_scenario("nope"));

    const auto fig2 = *builtin_scenario("fig2_no_brake");
    CHECK(fig2.cluster.total_mw() == Approx(1000.0));
    REQUIRE(fig2.events.load_steps.size() == 1);
    CHECK(fig2.events.load_steps[0].time_s == 0.1);
    double it = 0.0;
    for (const auto& b : fig2.cluster.buildings()) it += b.it_mw();
    CHECK(it == Approx(500.0));

    const auto fig4 = *builtin_scenario("fig4_multi_stage");
    std::vector<double> ratings;
    for (const auto& st : fig4.brake.schedule.stages) ratings.push_back(st.rating_mw);
    CHECK(ratings == std::vector<double>{130.0, 130.0, 110.0});

    const auto fig6 = *builtin_scenario("fig6_motor_dip");
    REQUIRE(fig6.events.voltage_dips.size() == 1);
    CHECK(fig6.events.voltage_dips[0].magnitude_pu == 0.25);
    CHECK(fig6.events.voltage_dips[0].duration_s == Approx(0.1));

    for (const auto& s : builtin_scenarios()) CHECK_NOTHROW(s.validate());
}

TEST_CASE("every built-in round-trips through the file format") {
    for (const auto& s : builtin_scenarios()) {
        INFO(s.name);
        const std::string text = serialize_scenario(s);
        const Scenario back = parse_scenario_text(text, s.name);
        CHECK(back == s);
        CHECK(serialize_scenario(back) == text);
    }
}

TEST_CASE("serialized built-ins match the golden files") {
    for (const auto& s : builtin_scenarios()) {
        INFO(s.name);
        std::ifstream in(std::string(GRIDBRAKE_GOLDEN_DIR) + "/" + s.name + ".yaml", std::ios::binary);
        REQUIRE(in);
        std::ostringstream golden;
        golden << in.rdbuf();
        CHECK(serialize_scenario(s) == golden.str());
    }
}

TEST_CASE("load_scenario accepts names and paths") {
    CHECK(load_scenario("fig3_mix_50sm").generation.sg_share == 0.5);
    const std::string path = "test_io_scenario.yaml";
    write_text_file(path, serialize_scenario(*builtin_scenario("fig2_brake_250")));
    CHECK(load_scenario(path) == *builtin_scenario("fig2_brake_250"));
    CHECK_THROWS_AS(load_scenario("does_not_exist.yaml"), ConfigError);
}

TEST_CASE("unknown keys are reported with their line") {
    auto lines = split_lines(serialize_scenario(*builtin_scenario("fig2_no_brake")));
    const std::size_t at = find_line(lines, "simulation:");
    lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(at) + 1, "  time_step: 0.001");
    CHECK(error_line(join_lines(lines)) == static_cast<int>(at) + 2);
    try {
        parse_scenario_text(join_lines(lines), "test.yaml");
    } catch (const ScenarioFileError& e) {
        CHECK(std::string(e.what()).find("test.yaml:") == 0);
        CHECK(std::string(e.what()).find("time_step") != std::string::npos);
    }
}

TEST_CASE("invariant violations point at the offending field") {
    auto lines = split_lines(serialize_scenario(*builtin_scenario("fig3_mix_75sm")));
    const std::size_t sg = find_line(lines, "  sg_share: 0.75");
    const std::size_t gfm = find_line(lines, "  gfm_share: 0.25");
    lines[sg] = "  sg_share: 0.7";
    lines[gfm] = "  gfm_share: 0.7";
    const int line = error_line(join_lines(lines));
    CHECK((line == static_cast<int>(sg) + 1 || line == static_cast<int>(gfm) + 1));

    auto neg = split_lines(serialize_scenario(*builtin_scenario("fig2_no_brake")));
    const std::size_t dt = find_line(neg, "  dt_s: 0.001");
    neg[dt] = "  dt_s: -0.001";
    CHECK(error_line(join_lines(neg)) == static_cast<int>(dt) + 1);
}

TEST_CASE("syntax errors and empty documents") {
    CHECK(error_line("") == 1);
    CHECK(error_line("# only a comment\n") == 1);
    CHECK(error_line("name: x\nbase: [1, 2\n") >= 2);
    CHECK(error_line("- a\n- b\n") == 1);
    CHECK_THROWS_AS(parse_scenario_text("name: 5\nsimulation: {dt_s: abc}\n"), ScenarioFileError);
}

TEST_CASE("number formatting is shortest round-trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(60.0) == "60");
    CHECK(format_double(-0.0) == "0");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-INFINITY) == "-inf");
    for (double x : {0.15000000000000002, 1.0 / 3.0, 6.02e23, -1.25e-7}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("trace and event CSV") {
    const auto tr = small_trace();
    std::ostringstream os;
    write_trace_csv(os, tr);
    const std::string csv = os.str();
    CHECK(csv.rfind("time_s,freq_hz,brake_p_pu\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(count_of(csv, "\n") == 5);

    std::istringstream is(csv);
    const auto table = read_csv(is);
    CHECK(table.column("time_s") == tr.time);
    CHECK(table.column("freq_hz") == tr.channels[0]);
    CHECK_THROWS_AS(table.column("nope"), ConfigError);

    std::ostringstream only;
    write_trace_csv(only, tr, {"brake_p_pu"});
    CHECK(only.str().rfind("time_s,brake_p_pu\n", 0) == 0);
    std::ostringstream bad;
    CHECK_THROWS_AS(write_trace_csv(bad, tr, {"missing"}), ConfigError);

    std::ostringstream ev;
    write_events_csv(ev, tr);
    CHECK(ev.str() == "time_s,kind,detail\n0.001,breaker_closed,brake1\n0.003,note,\"a, \"\"quoted\"\" detail\"\n");
}

TEST_CASE("metrics CSV writes nan for an unsettled trace") {
    TraceMetrics m;
    m.peak_abs_df_hz = 0.25;
    std::ostringstream os;
    write_metrics_csv(os, m);
    CHECK(os.str().find("settling_time_s,nan\n") != std::string::npos);
    CHECK(os.str().find("peak_abs_df_hz,0.25\n") != std::string::npos);
}

TEST_CASE("eigen CSV skips failed points") {
    EigenPoint ok;
    ok.scr = 2.0;
    ok.brake_mw = 50.0;
    ok.eigenvalues = {{-0.5, 2.0}, {-0.5, -2.0}, {-3.0, 0.0}};
    ok.dominant = ok.eigenvalues[0];
    ok.stable = true;
    EigenPoint bad;
    bad.scr = 5.0;
    bad.brake_mw = 50.0;
    bad.error = "failed";
    std::ostringstream os;
    write_eigen_csv(os, {ok, bad});
    std::istringstream is(os.str());
    const auto t = read_csv(is);
    CHECK(t.header == std::vector<std::string>{"scr", "brake_mw", "eig_index", "re_1_per_s", "im_rad_per_s",
                                               "dominant_flag", "stable_flag"});
    REQUIRE(t.column("scr").size() == 3);
    CHECK(t.column("dominant_flag") == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(t.column("im_rad_per_s")[1] == -2.0);
}

TEST_CASE("trace plots are deterministic and validated") {
    const auto tr = small_trace();
    PlotSpec spec;
    spec.channels = {"freq_hz", "brake_p_pu"};
    spec.title = "tiny";
    spec.markers = event_markers(tr);
    const std::vector<LabeledTable> tables{{"run", trace_table(tr)}};
    const std::string a = render_trace_svg(tables, spec);
    const std::string b = render_trace_svg(tables, spec);
    CHECK(a == b);
    CHECK(a.rfind("<svg", 0) == 0);
    CHECK(a.find("</svg>") != std::string::npos);
    CHECK(a.find("nan") == std::string::npos);

    CHECK_THROWS_AS(render_trace_svg({}, spec), ConfigError);
    PlotSpec missing = spec;
    missing.channels = {"motor_slip"};
    CHECK_THROWS_AS(render_trace_svg(tables, missing), ConfigError);
    SimTrace empty;
    empty.channel_names = {"freq_hz"};
    empty.channels = {{}};
    CHECK_THROWS_AS(render_trace_svg({{"empty", trace_table(empty)}}, spec), ConfigError);
}

TEST_CASE("eigen scatter has one series per SCR") {
    std::vector<EigenPoint> pts;
    for (double scr : {2.0, 5.0}) {
        EigenPoint p;
        p.scr = scr;
        p.brake_mw = 100.0;
        p.eigenvalues = {{-0.1 * scr, 1.0}, {-0.1 * scr, -1.0}};
        p.dominant = p.eigenvalues[0];
        p.stable = true;
        pts.push_back(p);
    }
    std::ostringstream os;
    write_eigen_csv(os, pts);
    std::istringstream is(os.str());
    const std::string svg = render_eigen_svg(read_csv(is), "eigen");
    CHECK(count_of(svg, ">SCR ") == 2);
    // four eigenvalues plus one legend swatch per series
    CHECK(count_of(svg, "<circle") == 6);
}
