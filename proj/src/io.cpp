#include "gridbrake/io.hpp"

#include "gridbrake/builtins.hpp"
#include "gridbrake/error.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gridbrake {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

/// Keyed view of one YAML mapping that remembers which keys were consumed.
class Section {
public:
    Section(YAML::Node node, std::string path, const std::string& source, std::map<std::string, int>& lines)
        : node_(std::move(node)), path_(std::move(path)), source_(source), lines_(lines) {
        if (!node_.IsMap()) fail(line_of(node_), "'" + path_ + "' must be a mapping");
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            lines_[qualified(key)] = line_of(kv.first);
        }
    }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ScenarioFileError(source_ + ":" + std::to_string(line) + ": " + msg, line);
    }

    bool has(const std::string& key) const { return node_[key].IsDefined() && !node_[key].IsNull(); }
    int line() const { return line_of(node_); }
    const std::string& path() const { return path_; }

    YAML::Node raw(const std::string& key) {
        used_.insert(key);
        return node_[key];
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        used_.insert(key);
        const YAML::Node n = node_[key];
        if (!n.IsDefined() || n.IsNull()) return;
        out = scalar<T>(n, qualified(key));
    }

    void get_opt(const std::string& key, std::optional<double>& out) {
        used_.insert(key);
        const YAML::Node n = node_[key];
        if (!n.IsDefined() || n.IsNull()) {
            out.reset();
            return;
        }
        out = scalar<double>(n, qualified(key));
    }

    template <typename T>
    void get_list(const std::string& key, std::vector<T>& out) {
        used_.insert(key);
        const YAML::Node n = node_[key];
        if (!n.IsDefined() || n.IsNull()) return;
        if (!n.IsSequence()) fail(line_of(n), "'" + qualified(key) + "' must be a list");
        out.clear();
        for (const auto& item : n) out.push_back(scalar<T>(item, qualified(key)));
    }

    Section child(const std::string& key) {
        used_.insert(key);
        return Section(node_[key], qualified(key), source_, lines_);
    }

    /// Children of a list of mappings.
    std::vector<Section> children(const std::string& key) {
        used_.insert(key);
        std::vector<Section> out;
        const YAML::Node n = node_[key];
        if (!n.IsDefined() || n.IsNull()) return out;
        if (!n.IsSequence()) fail(line_of(n), "'" + qualified(key) + "' must be a list");
        for (std::size_t i = 0; i < n.size(); ++i)
            out.emplace_back(n[i], qualified(key) + "[" + std::to_string(i) + "]", source_, lines_);
        return out;
    }

    /// Rejects every key that was not consumed.
    void finish() const {
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!used_.count(key)) fail(line_of(kv.first), "unknown key '" + qualified(key) + "'");
        }
    }

private:
    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <typename T>
    T scalar(const YAML::Node& n, const std::string& what) const {
        if (!n.IsScalar()) fail(line_of(n), "'" + what + "' must be a scalar");
        try {
            T v = n.as<T>();
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) fail(line_of(n), "'" + what + "' must be finite");
            }
            return v;
        } catch (const YAML::BadConversion&) {
            fail(line_of(n), "'" + what + "' has an invalid value '" + n.Scalar() + "'");
        }
    }

    YAML::Node node_;
    std::string path_;
    const std::string& source_;
    std::map<std::string, int>& lines_;
    std::set<std::string> used_;
};

template <typename E>
E parse_enum(Section& s, const std::string& key, const std::vector<std::pair<std::string, E>>& table, E def) {
    std::string text;
    s.get(key, text);
    if (text.empty()) return def;
    for (const auto& [name, value] : table) {
        if (name == text) return value;
    }
    std::string allowed;
    for (const auto& [name, value] : table) allowed += (allowed.empty() ? "" : ", ") + name;
    s.fail(s.line(), "'" + s.path() + "." + key + "' must be one of " + allowed);
}

const std::vector<std::pair<std::string, BrakeTrigger>> kTriggers{{"on_load_loss", BrakeTrigger::OnLoadLossEvent},
                                                                   {"explicit_times", BrakeTrigger::ExplicitTimes}};
const std::vector<std::pair<std::string, LoadStepKind>> kStepKinds{{"grid_excursion", LoadStepKind::GridExcursion},
                                                                    {"plant_fault", LoadStepKind::PlantFault}};
const std::vector<std::pair<std::string, BreakerCommand>> kCommands{{"close", BreakerCommand::Close},
                                                                     {"open", BreakerCommand::Open}};

template <typename E>
std::string enum_name(const std::vector<std::pair<std::string, E>>& table, E v) {
    for (const auto& [name, value] : table) {
        if (value == v) return name;
    }
    return {};
}

void read_envelope(Section& relay, const std::string& key, std::vector<EnvelopeSegment>& out) {
    if (!relay.has(key)) {
        relay.raw(key);
        return;
    }
    out.clear();
    for (auto& seg : relay.children(key)) {
        EnvelopeSegment e;
        seg.get("threshold_pu", e.threshold_pu);
        seg.get("max_dwell_s", e.max_dwell_s);
        seg.finish();
        out.push_back(e);
    }
}

Scenario read_document(const YAML::Node& root, const std::string& source, std::map<std::string, int>& lines) {
    Scenario sc;
    Section top(root, "", source, lines);
    top.get("name", sc.name);
    top.get("description", sc.description);

    if (top.has("base")) {
        auto b = top.child("base");
        b.get("s_base_mva", sc.base.s_base_mva);
        b.get("v_base_kv", sc.base.v_base_kv);
        b.get("f_nominal_hz", sc.base.f_nominal_hz);
        b.finish();
    } else {
        top.raw("base");
    }

    if (!top.has("topology")) top.fail(1, "missing section 'topology'");
    {
        auto t = top.child("topology");
        t.get_list("buses", sc.topology.buses);
        t.get("pcc_bus", sc.topology.pcc_bus);
        for (auto& l : t.children("lines")) {
            LineParams lp;
            l.get("from", lp.from);
            l.get("to", lp.to);
            l.get("resistance_pu_per_km", lp.resistance_per_km);
            l.get("reactance_pu_per_km", lp.inductance_per_km);
            l.get("length_km", lp.length_km);
            l.get("parallel_count", lp.parallel_count);
            l.finish();
            sc.topology.lines.push_back(lp);
        }
        if (t.has("grid")) {
            auto g = t.child("grid");
            GridEquivalent ge;
            g.get("bus", ge.bus);
            g.get("scr", ge.scr);
            g.get("x_over_r", ge.x_over_r);
            g.get("source_voltage_pu", ge.source_voltage_pu);
            g.finish();
            sc.topology.grid = ge;
        } else {
            t.raw("grid");
        }
        for (auto& c : t.children("capacitors")) {
            CapacitorSpec cs;
            c.get("name", cs.name);
            c.get("bus", cs.bus);
            c.get("mvar", cs.mvar);
            c.get("closed", cs.closed);
            c.finish();
            sc.topology.capacitors.push_back(cs);
        }
        t.finish();
    }

    if (!top.has("devices")) top.fail(1, "missing section 'devices'");
    {
        auto d = top.child("devices");
        auto& g = sc.generation;
        d.get("total_mw", g.total_mw);
        d.get("sg_share", g.sg_share);
        d.get("gfm_share", g.gfm_share);
        d.get("sg_bus", g.sg_bus);
        d.get("gfm_bus", g.gfm_bus);
        d.get("sg_dispatch_pu", g.sg_dispatch_pu);
        d.get("gfm_dispatch_pu", g.gfm_dispatch_pu);
        d.get("voltage_setpoint_pu", g.voltage_setpoint_pu);
        d.get("sg_initial_speed_pu", g.sg_initial_speed_pu);
        if (d.has("sg")) {
            auto s = d.child("sg");
            s.get("r_a_pu", g.sg.r_a);
            s.get("x_a_pu", g.sg.x_a);
            s.get("x_d_pu", g.sg.x_d);
            s.get("t_d0_s", g.sg.t_d0_s);
            s.get("h_s", g.sg.h_s);
            s.get("d_pu", g.sg.d);
            if (s.has("exciter")) {
                auto e = s.child("exciter");
                auto& x = g.sg.exciter;
                e.get("enabled", x.enabled);
                e.get("ka_pu", x.ka);
                e.get("ta_s", x.ta_s);
                e.get("ke_pu", x.ke);
                e.get("te_s", x.te_s);
                e.get("kf_pu", x.kf);
                e.get("tf_s", x.tf_s);
                e.get("vr_min_pu", x.vr_min);
                e.get("vr_max_pu", x.vr_max);
                e.finish();
            } else {
                s.raw("exciter");
            }
            if (s.has("governor")) {
                auto e = s.child("governor");
                auto& x = g.sg.governor;
                e.get("enabled", x.enabled);
                e.get("droop_pu", x.droop);
                e.get("t_servo_s", x.t_servo_s);
                e.get("t_reheat_s", x.t_reheat_s);
                e.get("hp_fraction", x.hp_fraction);
                e.get("p_min_pu", x.p_min);
                e.get("p_max_pu", x.p_max);
                e.finish();
            } else {
                s.raw("governor");
            }
            s.finish();
        } else {
            d.raw("sg");
        }
        if (d.has("gfm")) {
            auto s = d.child("gfm");
            auto& x = g.gfm;
            s.get("filter_inductance_h", x.filter_inductance_h);
            s.get("filter_capacitance_f", x.filter_capacitance_f);
            s.get("filter_base_kv", x.filter_base_kv);
            s.get("current_limit_pu", x.current_limit_pu);
            s.get("droop_p_pu", x.droop_p);
            s.get("droop_q_pu", x.droop_q);
            s.get("tau_p_s", x.tau_p_s);
            s.get("tau_v_s", x.tau_v_s);
            s.finish();
        } else {
            d.raw("gfm");
        }
        d.finish();
    }

    if (top.has("cluster")) {
        auto c = top.child("cluster");
        auto& x = sc.cluster;
        c.get("bus", x.bus);
        c.get("building_count", x.building_count);
        c.get("building_rated_mw", x.building_rated_mw);
        c.get("it_fraction", x.it_fraction);
        c.get("motor_fraction", x.motor_fraction);
        c.get("it_power_factor", x.it_power_factor);
        c.get("static_power_factor", x.static_power_factor);
        c.get("load_v_min_pu", x.load_v_min_pu);
        if (c.has("relay")) {
            auto r = c.child("relay");
            r.get("enabled", x.relay.enabled);
            r.get("pickup_cycles", x.relay.pickup_cycles);
            read_envelope(r, "undervoltage", x.relay.undervoltage);
            read_envelope(r, "overvoltage", x.relay.overvoltage);
            r.finish();
        } else {
            c.raw("relay");
        }
        if (c.has("motor")) {
            auto m = c.child("motor");
            auto& p = x.motor;
            m.get("rs_pu", p.rs);
            m.get("xs_pu", p.xs);
            m.get("xm_pu", p.xm);
            m.get("rr_pu", p.rr);
            m.get("xr_pu", p.xr);
            m.get("h_s", p.h_s);
            m.get("torque_exponent", p.torque_exponent);
            m.finish();
        } else {
            c.raw("motor");
        }
        c.finish();
    } else {
        top.raw("cluster");
        sc.cluster.building_count = 0;
    }

    if (top.has("brake")) {
        auto b = top.child("brake");
        b.get("bus", sc.brake.bus);
        sc.brake.schedule.trigger = parse_enum(b, "trigger", kTriggers, BrakeTrigger::OnLoadLossEvent);
        b.get("max_insertion_s", sc.brake.schedule.max_insertion_s);
        for (auto& s : b.children("stages")) {
            BrakeStage st;
            s.get("name", st.name);
            s.get("rating_mw", st.rating_mw);
            s.get("insert_command_s", st.insert_command_s);
            s.get_opt("remove_command_s", st.remove_command_s);
            s.get("insert_delay_s", st.insert_delay_s);
            s.get("remove_delay_s", st.remove_delay_s);
            s.get("thermal_limit_mj", st.thermal_limit_mj);
            s.finish();
            sc.brake.schedule.stages.push_back(st);
        }
        b.finish();
    } else {
        top.raw("brake");
    }

    if (top.has("events")) {
        auto e = top.child("events");
        for (auto& s : e.children("load_steps")) {
            LoadStepSpec ls;
            s.get("time_s", ls.time_s);
            ls.kind = parse_enum(s, "kind", kStepKinds, LoadStepKind::GridExcursion);
            s.get_list("buildings", ls.buildings);
            s.finish();
            sc.events.load_steps.push_back(ls);
        }
        for (auto& s : e.children("shunt_switches")) {
            ShuntSwitchSpec sw;
            s.get("time_s", sw.time_s);
            s.get("element", sw.element);
            sw.command = parse_enum(s, "command", kCommands, BreakerCommand::Open);
            s.get("delay_s", sw.delay_s);
            s.finish();
            sc.events.shunt_switches.push_back(sw);
        }
        for (auto& s : e.children("voltage_dips")) {
            VoltageDipSpec vd;
            s.get("bus", vd.bus);
            s.get("start_s", vd.start_s);
            s.get("duration_s", vd.duration_s);
            s.get("magnitude_pu", vd.magnitude_pu);
            s.finish();
            sc.events.voltage_dips.push_back(vd);
        }
        e.finish();
    } else {
        top.raw("events");
    }

    if (top.has("simulation")) {
        auto s = top.child("simulation");
        s.get("dt_s", sc.simulation.dt_s);
        s.get("horizon_s", sc.simulation.horizon_s);
        s.get("frequency_band_hz", sc.simulation.frequency_band_hz);
        s.finish();
    } else {
        top.raw("simulation");
    }

    if (top.has("outputs")) {
        auto o = top.child("outputs");
        o.get_list("channels", sc.outputs.channels);
        o.get("plot", sc.outputs.plot);
        o.finish();
    } else {
        top.raw("outputs");
    }
    top.finish();
    return sc;
}

/// Best line for a validation message: the most specific recorded key.
int locate(const std::string& msg, const std::map<std::string, int>& lines) {
    static const std::vector<std::pair<std::string, std::string>> prefixes{
        {"system base", "base"},
        {"topology.", "topology."},
        {"topology", "topology"},
        {"line", "topology.lines"},
        {"grid", "topology.grid"},
        {"generation.", "devices."},
        {"generation", "devices"},
        {"sync gen", "devices.sg"},
        {"gfm", "devices.gfm"},
        {"cluster.", "cluster."},
        {"cluster", "cluster"},
        {"building", "cluster"},
        {"relay", "cluster.relay"},
        {"motor", "cluster.motor"},
        {"brake", "brake"},
        {"duplicate shunt", "brake"},
        {"events.", "events."},
        {"simulation.", "simulation."},
        {"outputs", "outputs.channels"},
    };
    for (const auto& [prefix, path] : prefixes) {
        if (msg.rfind(prefix, 0) != 0) continue;
        std::string key = path;
        if (path.back() == '.') {
            // carry the field name over, e.g. "simulation.dt_s must ..." -> simulation.dt_s
            const auto rest = msg.substr(prefix.size());
            const auto end = rest.find_first_of(" :");
            key += rest.substr(0, end);
        } else {
            // a field named later in the message, e.g. "generation: sg_share + ..." -> devices.sg_share
            std::size_t pos = prefix.size();
            while (pos < msg.size()) {
                const auto start = msg.find_first_of("abcdefghijklmnopqrstuvwxyz_", pos);
                if (start == std::string::npos) break;
                auto stop = msg.find_first_not_of("abcdefghijklmnopqrstuvwxyz_0123456789", start);
                if (stop == std::string::npos) stop = msg.size();
                if (auto it = lines.find(path + "." + msg.substr(start, stop - start)); it != lines.end())
                    return it->second;
                pos = stop;
            }
        }
        while (!key.empty()) {
            if (auto it = lines.find(key); it != lines.end()) return it->second;
            const auto dot = key.rfind('.');
            if (dot == std::string::npos) break;
            key.resize(dot);
        }
        return 1;
    }
    return 1;
}

void emit_envelope(YAML::Emitter& out, const std::vector<EnvelopeSegment>& segs) {
    out << YAML::BeginSeq;
    for (const auto& s : segs) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "threshold_pu" << YAML::Value << format_double(s.threshold_pu);
        out << YAML::Key << "max_dwell_s" << YAML::Value << format_double(s.max_dwell_s);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
}

void put(YAML::Emitter& out, const char* key, double v) { out << YAML::Key << key << YAML::Value << format_double(v); }
void put(YAML::Emitter& out, const char* key, const std::string& v) {
    out << YAML::Key << key << YAML::Value << YAML::DoubleQuoted << v;
}
void put(YAML::Emitter& out, const char* key, bool v) { out << YAML::Key << key << YAML::Value << (v ? "true" : "false"); }
void put(YAML::Emitter& out, const char* key, int v) { out << YAML::Key << key << YAML::Value << v; }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) x = 0.0;  // drop the sign of negative zero
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

Scenario parse_scenario_text(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        const int line = e.mark.is_null() ? 1 : e.mark.line + 1;
        throw ScenarioFileError(source + ":" + std::to_string(line) + ": syntax error: " + e.msg, line);
    }
    if (!root.IsDefined() || root.IsNull()) throw ScenarioFileError(source + ":1: syntax error: empty document", 1);
    if (!root.IsMap()) throw ScenarioFileError(source + ":1: syntax error: top level must be a mapping", 1);

    std::map<std::string, int> lines;
    Scenario sc = read_document(root, source, lines);
    try {
        sc.validate();
        const auto known = trace_channels(sc);
        for (const auto& c : sc.outputs.channels) {
            if (std::find(known.begin(), known.end(), c) == known.end())
                throw ConfigError("outputs.channels: unknown channel '" + c + "'");
        }
    } catch (const ScenarioFileError&) {
        throw;
    } catch (const ConfigError& e) {
        const int line = locate(e.what(), lines);
        throw ScenarioFileError(source + ":" + std::to_string(line) + ": " + e.what(), line);
    }
    return sc;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read scenario file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str(), path.string());
}

Scenario load_scenario(const std::string& name_or_path) {
    if (auto b = builtin_scenario(name_or_path)) return *b;
    if (!std::filesystem::exists(name_or_path))
        throw ConfigError("'" + name_or_path + "' is neither a built-in scenario nor a readable file");
    return parse_scenario(name_or_path);
}

std::string serialize_scenario(const Scenario& sc) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    put(out, "name", sc.name);
    put(out, "description", sc.description);

    out << YAML::Key << "base" << YAML::Value << YAML::BeginMap;
    put(out, "s_base_mva", sc.base.s_base_mva);
    put(out, "v_base_kv", sc.base.v_base_kv);
    put(out, "f_nominal_hz", sc.base.f_nominal_hz);
    out << YAML::EndMap;

    const auto& t = sc.topology;
    out << YAML::Key << "topology" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "buses" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& b : t.buses) out << YAML::DoubleQuoted << b;
    out << YAML::EndSeq;
    put(out, "pcc_bus", t.pcc_bus);
    out << YAML::Key << "lines" << YAML::Value << YAML::BeginSeq;
    for (const auto& l : t.lines) {
        out << YAML::BeginMap;
        put(out, "from", l.from);
        put(out, "to", l.to);
        put(out, "resistance_pu_per_km", l.resistance_per_km);
        put(out, "reactance_pu_per_km", l.inductance_per_km);
        put(out, "length_km", l.length_km);
        put(out, "parallel_count", l.parallel_count);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "grid" << YAML::Value;
    if (t.grid) {
        out << YAML::BeginMap;
        put(out, "bus", t.grid->bus);
        put(out, "scr", t.grid->scr);
        put(out, "x_over_r", t.grid->x_over_r);
        put(out, "source_voltage_pu", t.grid->source_voltage_pu);
        out << YAML::EndMap;
    } else {
        out << YAML::Null;
    }
    out << YAML::Key << "capacitors" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : t.capacitors) {
        out << YAML::BeginMap;
        put(out, "name", c.name);
        put(out, "bus", c.bus);
        put(out, "mvar", c.mvar);
        put(out, "closed", c.closed);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;

    const auto& g = sc.generation;
    out << YAML::Key << "devices" << YAML::Value << YAML::BeginMap;
    put(out, "total_mw", g.total_mw);
    put(out, "sg_share", g.sg_share);
    put(out, "gfm_share", g.gfm_share);
    put(out, "sg_bus", g.sg_bus);
    put(out, "gfm_bus", g.gfm_bus);
    put(out, "sg_dispatch_pu", g.sg_dispatch_pu);
    put(out, "gfm_dispatch_pu", g.gfm_dispatch_pu);
    put(out, "voltage_setpoint_pu", g.voltage_setpoint_pu);
    put(out, "sg_initial_speed_pu", g.sg_initial_speed_pu);
    out << YAML::Key << "sg" << YAML::Value << YAML::BeginMap;
    put(out, "r_a_pu", g.sg.r_a);
    put(out, "x_a_pu", g.sg.x_a);
    put(out, "x_d_pu", g.sg.x_d);
    put(out, "t_d0_s", g.sg.t_d0_s);
    put(out, "h_s", g.sg.h_s);
    put(out, "d_pu", g.sg.d);
    {
        const auto& x = g.sg.exciter;
        out << YAML::Key << "exciter" << YAML::Value << YAML::BeginMap;
        put(out, "enabled", x.enabled);
        put(out, "ka_pu", x.ka);
        put(out, "ta_s", x.ta_s);
        put(out, "ke_pu", x.ke);
        put(out, "te_s", x.te_s);
        put(out, "kf_pu", x.kf);
        put(out, "tf_s", x.tf_s);
        put(out, "vr_min_pu", x.vr_min);
        put(out, "vr_max_pu", x.vr_max);
        out << YAML::EndMap;
    }
    {
        const auto& x = g.sg.governor;
        out << YAML::Key << "governor" << YAML::Value << YAML::BeginMap;
        put(out, "enabled", x.enabled);
        put(out, "droop_pu", x.droop);
        put(out, "t_servo_s", x.t_servo_s);
        put(out, "t_reheat_s", x.t_reheat_s);
        put(out, "hp_fraction", x.hp_fraction);
        put(out, "p_min_pu", x.p_min);
        put(out, "p_max_pu", x.p_max);
        out << YAML::EndMap;
    }
    out << YAML::EndMap;
    {
        const auto& x = g.gfm;
        out << YAML::Key << "gfm" << YAML::Value << YAML::BeginMap;
        put(out, "filter_inductance_h", x.filter_inductance_h);
        put(out, "filter_capacitance_f", x.filter_capacitance_f);
        put(out, "filter_base_kv", x.filter_base_kv);
        put(out, "current_limit_pu", x.current_limit_pu);
        put(out, "droop_p_pu", x.droop_p);
        put(out, "droop_q_pu", x.droop_q);
        put(out, "tau_p_s", x.tau_p_s);
        put(out, "tau_v_s", x.tau_v_s);
        out << YAML::EndMap;
    }
    out << YAML::EndMap;

    const auto& c = sc.cluster;
    out << YAML::Key << "cluster" << YAML::Value << YAML::BeginMap;
    put(out, "bus", c.bus);
    put(out, "building_count", c.building_count);
    put(out, "building_rated_mw", c.building_rated_mw);
    put(out, "it_fraction", c.it_fraction);
    put(out, "motor_fraction", c.motor_fraction);
    put(out, "it_power_factor", c.it_power_factor);
    put(out, "static_power_factor", c.static_power_factor);
    put(out, "load_v_min_pu", c.load_v_min_pu);
    out << YAML::Key << "relay" << YAML::Value << YAML::BeginMap;
    put(out, "enabled", c.relay.enabled);
    put(out, "pickup_cycles", c.relay.pickup_cycles);
    out << YAML::Key << "undervoltage" << YAML::Value;
    emit_envelope(out, c.relay.undervoltage);
    out << YAML::Key << "overvoltage" << YAML::Value;
    emit_envelope(out, c.relay.overvoltage);
    out << YAML::EndMap;
    out << YAML::Key << "motor" << YAML::Value << YAML::BeginMap;
    put(out, "rs_pu", c.motor.rs);
    put(out, "xs_pu", c.motor.xs);
    put(out, "xm_pu", c.motor.xm);
    put(out, "rr_pu", c.motor.rr);
    put(out, "xr_pu", c.motor.xr);
    put(out, "h_s", c.motor.h_s);
    put(out, "torque_exponent", c.motor.torque_exponent);
    out << YAML::EndMap;
    out << YAML::EndMap;

    const auto& b = sc.brake;
    out << YAML::Key << "brake" << YAML::Value << YAML::BeginMap;
    put(out, "bus", b.bus);
    put(out, "trigger", enum_name(kTriggers, b.schedule.trigger));
    put(out, "max_insertion_s", b.schedule.max_insertion_s);
    out << YAML::Key << "stages" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : b.schedule.stages) {
        out << YAML::BeginMap;
        put(out, "name", s.name);
        put(out, "rating_mw", s.rating_mw);
        put(out, "insert_command_s", s.insert_command_s);
        out << YAML::Key << "remove_command_s" << YAML::Value;
        if (s.remove_command_s) {
            out << format_double(*s.remove_command_s);
        } else {
            out << YAML::Null;
        }
        put(out, "insert_delay_s", s.insert_delay_s);
        put(out, "remove_delay_s", s.remove_delay_s);
        put(out, "thermal_limit_mj", s.thermal_limit_mj);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;

    const auto& e = sc.events;
    out << YAML::Key << "events" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "load_steps" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : e.load_steps) {
        out << YAML::BeginMap;
        put(out, "time_s", s.time_s);
        put(out, "kind", enum_name(kStepKinds, s.kind));
        out << YAML::Key << "buildings" << YAML::Value << YAML::Flow << s.buildings;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "shunt_switches" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : e.shunt_switches) {
        out << YAML::BeginMap;
        put(out, "time_s", s.time_s);
        put(out, "element", s.element);
        put(out, "command", enum_name(kCommands, s.command));
        put(out, "delay_s", s.delay_s);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "voltage_dips" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : e.voltage_dips) {
        out << YAML::BeginMap;
        put(out, "bus", s.bus);
        put(out, "start_s", s.start_s);
        put(out, "duration_s", s.duration_s);
        put(out, "magnitude_pu", s.magnitude_pu);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;

    out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
    put(out, "dt_s", sc.simulation.dt_s);
    put(out, "horizon_s", sc.simulation.horizon_s);
    put(out, "frequency_band_hz", sc.simulation.frequency_band_hz);
    out << YAML::EndMap;

    out << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "channels" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& ch : sc.outputs.channels) out << ch;
    out << YAML::EndSeq;
    put(out, "plot", sc.outputs.plot);
    out << YAML::EndMap;

    out << YAML::EndMap;
    if (!out.good()) throw ConfigError(std::string("scenario serialization failed: ") + out.GetLastError());
    return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_trace_csv(std::ostream& os, const SimTrace& trace, const std::vector<std::string>& channels) {
    std::vector<const std::vector<double>*> cols;
    const auto& names = channels.empty() ? trace.channel_names : channels;
    os << "time_s";
    for (const auto& n : names) {
        cols.push_back(&trace.channel(n));
        os << ',' << n;
    }
    os << '\n';
    std::string row;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        row = format_double(trace.time[k]);
        for (const auto* c : cols) {
            row += ',';
            row += format_double((*c)[k]);
        }
        row += '\n';
        os << row;
    }
}

void write_events_csv(std::ostream& os, const SimTrace& trace) {
    os << "time_s,kind,detail\n";
    for (const auto& e : trace.events)
        os << format_double(e.time) << ',' << csv_field(e.kind) << ',' << csv_field(e.detail) << '\n';
}

void write_metrics_csv(std::ostream& os, const TraceMetrics& m) {
    os << "metric,value\n";
    auto row = [&](const char* k, double v) { os << k << ',' << format_double(v) << '\n'; };
    row("peak_sg_p_pu", m.peak_sg_p_pu);
    row("peak_freq_hz", m.peak_freq_hz);
    row("peak_abs_df_hz", m.peak_abs_df_hz);
    row("max_rocof_hz_per_s", m.max_rocof_hz_per_s);
    row("settling_time_s", m.settling_time_s.value_or(std::nan("")));
    row("reference_time_s", m.reference_time_s);
    row("oscillation_energy_hz2_s", m.oscillation_energy);
    row("sustained_deviation_hz", m.sustained_deviation_hz);
    row("brake_energy_mj", m.brake_energy_mj);
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepResult>& results) {
    os << "variant,peak_sg_p_pu,peak_abs_df_hz,max_rocof_hz_per_s,settling_time_s,oscillation_energy_hz2_s,"
          "sustained_deviation_hz,brake_energy_mj,error\n";
    for (const auto& r : results) {
        os << csv_field(r.label);
        if (r.metrics) {
            const auto& m = *r.metrics;
            for (double v : {m.peak_sg_p_pu, m.peak_abs_df_hz, m.max_rocof_hz_per_s, m.settling_time_s.value_or(std::nan("")),
                             m.oscillation_energy, m.sustained_deviation_hz, m.brake_energy_mj})
                os << ',' << format_double(v);
        } else {
            for (int k = 0; k < 7; ++k) os << ",nan";
        }
        os << ',' << csv_field(r.error) << '\n';
    }
}

void write_eigen_csv(std::ostream& os, const std::vector<EigenPoint>& points) {
    os << "scr,brake_mw,eig_index,re_1_per_s,im_rad_per_s,dominant_flag,stable_flag\n";
    for (const auto& p : points) {
        if (!p.error.empty()) continue;
        for (std::size_t i = 0; i < p.eigenvalues.size(); ++i) {
            const auto z = p.eigenvalues[i];
            os << format_double(p.scr) << ',' << format_double(p.brake_mw) << ',' << i << ',' << format_double(z.real())
               << ',' << format_double(z.imag()) << ',' << (i == 0 ? 1 : 0) << ',' << (p.stable ? 1 : 0) << '\n';
        }
    }
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("csv has no column '" + name + "'");
    return columns[static_cast<std::size_t>(std::distance(header.begin(), it))];
}

CsvTable read_csv(std::istream& is) {
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("csv: empty input");
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
    t.columns.assign(t.header.size(), {});
    int row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::size_t pos = 0;
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            const auto end = std::min(line.find(',', pos), line.size());
            const std::string cell = line.substr(pos, end - pos);
            double v = 0.0;
            if (cell == "nan") {
                v = std::nan("");
            } else {
                const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
                    throw ConfigError("csv row " + std::to_string(row) + ": '" + cell + "' is not a number");
            }
            t.columns[c].push_back(v);
            pos = end + 1;
        }
    }
    return t;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

}  // namespace gridbrake
