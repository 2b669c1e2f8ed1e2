#include "weaktrace/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "weaktrace/criteria.hpp"
#include "weaktrace/danan.hpp"

namespace weaktrace::cli {
namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v + 0.0);  // no "-0"
    return buf;
}

json to_json(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v + 0.0;
}

json to_json(const std::optional<double>& v) { return v ? to_json(*v) : json(nullptr); }

using Cell = std::variant<std::string, double, std::optional<double>>;

// A flat table plus key/value metadata; rendered as commented CSV or JSON.
struct Report {
    std::string scenario;
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    json extra = json::object();

    void param(const std::string& key, const std::string& value) { meta.emplace_back(key, value); }
    void param(const std::string& key, double value) { meta.emplace_back(key, fmt(value)); }

    void write_csv(std::ostream& os) const {
        os << "# weaktrace " << kVersion << "\n";
        os << "# scenario: " << scenario << "\n";
        for (const auto& [k, v] : meta) os << "# " << k << ": " << v << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) os << ",";
                std::visit([&](const auto& c) { os << cell_text(c); }, row[i]);
            }
            os << "\n";
        }
    }

    void write_json(std::ostream& os) const {
        json doc;
        doc["version"] = kVersion;
        doc["scenario"] = scenario;
        json params = json::object();
        for (const auto& [k, v] : meta) params[k] = v;
        doc["parameters"] = params;
        for (const auto& [k, v] : extra.items()) doc[k] = v;
        json arr = json::array();
        for (const auto& row : rows) {
            json obj = json::object();
            for (std::size_t i = 0; i < row.size(); ++i) {
                std::visit([&](const auto& c) { obj[columns[i]] = cell_json(c); }, row[i]);
            }
            arr.push_back(obj);
        }
        doc["rows"] = arr;
        os << doc.dump(2) << "\n";
    }

private:
    static std::string cell_text(const std::string& s) { return s; }
    static std::string cell_text(double v) { return fmt(v); }
    static std::string cell_text(const std::optional<double>& v) { return v ? fmt(*v) : "nan"; }
    static json cell_json(const std::string& s) { return s; }
    static json cell_json(double v) { return to_json(v); }
    static json cell_json(const std::optional<double>& v) { return to_json(v); }
};

struct Common {
    double delta = 1.0;
    bool json = false;
    std::string out_path;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--delta", c.delta, "Squared width of the initial meter wavefunction")
        ->capture_default_str();
    sub->add_flag("--json", c.json, "Emit JSON instead of CSV");
    sub->add_option("--out", c.out_path, "Write output to PATH instead of stdout");
}

Arm arm_option(const std::string& name, const char* flag) {
    const auto arm = parse_arm(name);
    if (!arm) throw InvalidArgument(std::string(flag) + ": unknown arm '" + name + "'");
    return *arm;
}

Arm detector_option(const std::string& name) {
    const Arm arm = arm_option(name, "--post");
    if (!is_detector(arm)) throw InvalidArgument("--post must be D1, D2 or D3");
    return arm;
}

void require_positive(double v, const char* flag) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(flag) + " must be positive");
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

constexpr std::array<Arm, 5> kReportArms = {Arm::A, Arm::B, Arm::C, Arm::D, Arm::E};

Report cmd_weak_values(const Common& c, const std::string& post_name) {
    const Arm post = detector_option(post_name);
    const auto circuit = build_nested_mzi();
    const Photon in = basis_state<double>(Arm::N);
    Report r;
    r.scenario = "weak-values";
    r.param("pre", "N");
    r.param("post", std::string(arm_name(post)));
    r.columns = {"arm", "weak_value_re", "weak_value_im", "tsvf_re", "tsvf_im"};
    json by_arm = json::object();
    std::complex<double> abc = 0.0;
    std::complex<double> ad = 0.0;
    for (Arm arm : kReportArms) {
        const auto wv = weak_value_analytic(circuit, arm, in, post);
        const auto ts = weak_value_tsvf(circuit, arm, in, post);
        r.rows.push_back({std::string(arm_name(arm)), wv.real(), wv.imag(), ts.real(), ts.imag()});
        by_arm[std::string(arm_name(arm))] = {{"re", wv.real()}, {"im", wv.imag()},
                                              {"tsvf_re", ts.real()}, {"tsvf_im", ts.imag()}};
        if (arm == Arm::A || arm == Arm::B || arm == Arm::C) abc += wv;
        if (arm == Arm::A || arm == Arm::D) ad += wv;
    }
    r.param("sum_ABC", abc.real());
    r.param("sum_AD", ad.real());
    r.extra["values"] = by_arm;
    (void)c;
    return r;
}

Report cmd_mean_values(const Common& c, double g) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidArgument("--g must be non-negative");
    const auto circuit = build_nested_mzi();
    const Photon in = basis_state<double>(Arm::N);
    Report r;
    r.scenario = "mean-values";
    r.param("pre", "N");
    r.param("delta", c.delta);
    r.param("g", g);
    r.columns = {"arm", "g", "pointer_mean", "ratio", "limit"};
    for (Arm arm : kReportArms) {
        const auto rec = weak_mean_value(circuit, arm, in, g, c.delta);
        r.rows.push_back({std::string(arm_name(arm)), rec.g, rec.pointer_mean, rec.ratio, rec.limit});
    }
    return r;
}

Report cmd_sweep(const Common& c, const std::string& arm_name_, const std::string& post_name,
                 const std::vector<double>& g_list, long long mc_n, std::uint64_t seed) {
    const Arm arm = arm_option(arm_name_, "--arm");
    const Arm post = detector_option(post_name);
    if (mc_n < 0) throw InvalidArgument("--mc-n must be non-negative");
    const auto circuit = build_nested_mzi();
    const Photon in = basis_state<double>(Arm::N);
    const auto rec = weak_value_operational(circuit, arm, in, post, g_list, c.delta);

    Report r;
    r.scenario = "sweep";
    r.param("arm", std::string(arm_name(arm)));
    r.param("post", std::string(arm_name(post)));
    r.param("delta", c.delta);
    r.param("g", join(g_list));
    r.param("analytic_re", rec.analytic.real());
    r.param("analytic_im", rec.analytic.imag());
    r.param("extrapolated", rec.extrapolated);
    r.columns = {"g", "postselection_probability", "pointer_mean", "ratio"};
    if (mc_n > 0) {
        r.param("mc_n", std::to_string(mc_n));
        r.param("seed", std::to_string(seed));
        r.columns.insert(r.columns.end(), {"mc_estimate", "mc_stderr", "mc_accepted"});
    }
    for (std::size_t i = 0; i < rec.points.size(); ++i) {
        const auto& p = rec.points[i];
        std::vector<Cell> row = {p.g, p.postselection_probability, p.pointer_mean, p.ratio};
        if (mc_n > 0) {
            // Each coupling gets its own stream derived from the base seed.
            const auto mc = monte_carlo_weak_value(circuit, arm, in, post, p.g, c.delta, mc_n, seed + i);
            row.insert(row.end(), {mc.estimate, mc.standard_error, static_cast<double>(mc.accepted)});
        }
        r.rows.push_back(std::move(row));
    }
    return r;
}

Report cmd_discontinuity(const Common& c, const std::vector<double>& grid) {
    const auto circuit = build_nested_mzi();
    const auto rep = discontinuity_report(circuit, grid, c.delta);
    Report r;
    r.scenario = "discontinuity";
    r.param("meter_arm", "B");
    r.param("post", "D2");
    r.param("delta", c.delta);
    r.param("g_grid", join(grid));
    r.param("extrapolated_weak_value", rep.extrapolated_weak_value);
    r.param("occupation_positive_for_all_g", rep.occupation_positive_for_all_g ? "true" : "false");
    r.param("occupation_zero_at_g0", rep.occupation_zero_at_g0 ? "true" : "false");
    r.param("signal_only_through_e", rep.signal_only_through_e ? "true" : "false");
    r.param("discontinuous", rep.discontinuous() ? "true" : "false");
    r.columns = {"g", "p_e", "p_e_closed_form", "ratio", "analogy_ratio", "e_path_d2_norm2",
                 "d2_moment_without_e"};
    for (const auto& row : rep.rows) {
        r.rows.push_back({row.g, row.p_e, row.p_e_closed_form, row.ratio, row.analogy_ratio,
                          row.e_path_d2_norm2, row.d2_moment_without_e});
    }
    return r;
}

struct DananOptions {
    std::string mode = "weakvalue";
    std::vector<std::string> mirrors = {"M1", "M2", "M3"};
    std::string read;
    double g0 = 1e-2;
    double duration = 1.0;
    double sample_rate = 256.0;
    bool traces = false;
};

Report cmd_danan(const Common& c, const DananOptions& o) {
    using namespace danan;
    ReadoutMode mode;
    if (o.mode == "weakvalue") {
        mode = ReadoutMode::WeakValue;
    } else if (o.mode == "mean") {
        mode = ReadoutMode::Mean;
    } else {
        throw InvalidArgument("--mode must be weakvalue or mean");
    }
    require_positive(o.g0, "--g");

    MirrorSchedule schedule = standard_schedule(o.g0);
    for (auto& m : schedule.mirrors) m.enabled = false;
    for (const auto& name : o.mirrors) {
        auto it = std::find_if(schedule.mirrors.begin(), schedule.mirrors.end(),
                               [&](const Mirror& m) { return m.name == name; });
        if (it == schedule.mirrors.end()) throw InvalidArgument("--mirrors: unknown mirror '" + name + "'");
        it->enabled = true;
    }

    std::vector<std::string> series = mode_series(mode);
    if (!o.read.empty()) {
        const std::string wanted = o.read + "_mean";
        if (std::find(series.begin(), series.end(), wanted) == series.end()) {
            throw InvalidArgument("--read " + o.read + " is not read out in mode " + o.mode);
        }
        series = {wanted};
    }

    const auto cmp = readout_mode_compare(schedule, o.duration, o.sample_rate, c.delta);
    Report r;
    r.scenario = o.traces ? "danan-traces" : "danan-spectrum";
    r.param("mode", o.mode);
    r.param("delta", c.delta);
    r.param("g0", o.g0);
    r.param("duration", o.duration);
    r.param("sample_rate", o.sample_rate);
    for (const auto& m : schedule.mirrors) {
        r.param(m.name, std::string(arm_name(m.arm)) + " f=" + fmt(m.frequency) +
                            (m.enabled ? " enabled" : " disabled"));
    }
    const auto& peaks = (mode == ReadoutMode::WeakValue) ? cmp.weak_value_peaks : cmp.mean_peaks;
    json peak_json = json::array();
    for (const auto& p : peaks) {
        if (std::find(series.begin(), series.end(), p.series) == series.end()) continue;
        r.param("peak " + p.series + " " + p.mirror, "f=" + fmt(p.frequency) + " amplitude=" + fmt(p.amplitude));
        peak_json.push_back({{"series", p.series}, {"mirror", p.mirror},
                             {"frequency", p.frequency}, {"amplitude", p.amplitude}});
    }
    r.extra["peaks"] = peak_json;

    if (o.traces) {
        r.columns = {"t"};
        for (const auto& s : series) r.columns.push_back(s);
        for (std::size_t i = 0; i < cmp.traces.time.size(); ++i) {
            std::vector<Cell> row = {cmp.traces.time[i]};
            for (const auto& s : series) row.emplace_back(cmp.traces.get(s).values[i]);
            r.rows.push_back(std::move(row));
        }
    } else {
        r.columns = {"f"};
        for (const auto& s : series) r.columns.push_back(s + "_power");
        const auto& ref = cmp.traces.spectrum(series.front());
        for (std::size_t k = 0; k < ref.frequency.size(); ++k) {
            std::vector<Cell> row = {ref.frequency[k]};
            for (const auto& s : series) row.emplace_back(cmp.traces.spectrum(s).power[k]);
            r.rows.push_back(std::move(row));
        }
    }
    return r;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("WEAKTRACE_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') throw InvalidArgument("WEAKTRACE_SEED is not an unsigned integer");
        return v;
    }
    return 20140101ULL;
}

void emit(const Report& r, const Common& c, std::ostream& out) {
    std::ostringstream buf;
    if (c.json) {
        r.write_json(buf);
    } else {
        r.write_csv(buf);
    }
    if (c.out_path.empty()) {
        out << buf.str();
        return;
    }
    std::ofstream f(c.out_path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot open --out path " + c.out_path);
    f << buf.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nested Mach-Zehnder weak-measurement simulator", "weaktrace"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;
    std::string post = "D2";
    std::string arm = "B";
    double g = 0.1;
    std::vector<double> g_list = {1.0, 0.5, 0.1, 0.01};
    std::vector<double> g_grid = {0.5, 0.1, 0.01};
    long long mc_n = 0;
    std::optional<std::uint64_t> seed;
    DananOptions danan_opts;

    auto* wv = app.add_subcommand("weak-values", "Analytic and two-state weak values for arms A-E");
    add_common(wv, common);
    wv->add_option("--post", post, "Postselected detector")->capture_default_str();

    auto* mv = app.add_subcommand("mean-values", "Unconditional weak mean values for arms A-E");
    add_common(mv, common);
    mv->add_option("--g", g, "Coupling strength")->capture_default_str();

    auto* sw = app.add_subcommand("sweep", "Operational weak value: postselected <Q_M>/g over a g list");
    add_common(sw, common);
    sw->add_option("--arm", arm, "Measured arm")->capture_default_str();
    sw->add_option("--post", post, "Postselected detector")->capture_default_str();
    sw->add_option("--g", g_list, "Comma-separated couplings, strictly decreasing")->delimiter(',');
    sw->add_option("--mc-n", mc_n, "Monte Carlo trials per coupling (0 disables)");
    sw->add_option("--seed", seed, "Monte Carlo seed (default: WEAKTRACE_SEED)");

    auto* dc = app.add_subcommand("discontinuity", "E-arm occupation vs. weak value as g -> 0");
    add_common(dc, common);
    dc->add_option("--g-grid", g_grid, "Comma-separated couplings, strictly decreasing")->delimiter(',');

    auto* dn = app.add_subcommand("danan", "Vibrating-mirror traces and spectra");
    add_common(dn, common);
    dn->add_option("--mode", danan_opts.mode, "weakvalue | mean")->capture_default_str();
    dn->add_option("--mirrors", danan_opts.mirrors, "Enabled mirrors, comma-separated")->delimiter(',');
    dn->add_option("--read", danan_opts.read, "Restrict output to one detector (D1, D2, D3, D12)");
    dn->add_option("--g", danan_opts.g0, "Vibration amplitude g0")->capture_default_str();
    dn->add_option("--duration", danan_opts.duration)->capture_default_str();
    dn->add_option("--sample-rate", danan_opts.sample_rate)->capture_default_str();
    dn->add_flag("--traces", danan_opts.traces, "Emit time series instead of spectra");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidConfig;
    }

    try {
        require_positive(common.delta, "--delta");
        Report report;
        if (*wv) {
            report = cmd_weak_values(common, post);
        } else if (*mv) {
            report = cmd_mean_values(common, g);
        } else if (*sw) {
            report = cmd_sweep(common, arm, post, g_list, mc_n, seed ? *seed : default_seed());
        } else if (*dc) {
            report = cmd_discontinuity(common, g_grid);
        } else {
            report = cmd_danan(common, danan_opts);
        }
        emit(report, common, out);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidConfig;
    } catch (const UndefinedWeakValue& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidConfig;
    } catch (const NoPostselectedEvents& e) {
        err << "error: " << e.what() << "\n";
        return kNoEvents;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kOk;
}

}  // namespace weaktrace::cli
