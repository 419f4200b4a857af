#include "mmphase/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mmphase/analysis.hpp"
#include "mmphase/error.hpp"
#include "mmphase/isoclines.hpp"
#include "mmphase/series.hpp"
#include "mmphase/slow_manifold.hpp"

namespace mmphase::cli {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct RunConfig {
    std::optional<double> eps, eta, k1, k_minus1, k2, e0;
    double x_min = 1e-3;
    double x_max = 1e3;
    std::size_t grid = 600;
    std::optional<double> tol;
    std::size_t n = 5;
    bool infinity = false;
    bool origin = false;
    std::string starts;
    std::string out;
    std::string report;
    std::string format;  // empty: the subcommand default
    std::uint64_t seed = 1;
    double t_end = 100.0;
    std::size_t count = 20;
    std::vector<double> slopes;
    double lo = 0.01;
    double hi = 10.0;
};

Parameters resolve(const RunConfig& c) {
    const bool direct = c.eps || c.eta;
    const bool rates = c.k1 || c.k_minus1 || c.k2 || c.e0;
    if (direct == rates) {
        throw UsageError("give either --eps and --eta or all of --k1 --k-1 --k2 --e0");
    }
    if (direct) {
        if (!c.eps || !c.eta) throw UsageError("--eps and --eta must be given together");
        return Parameters(*c.eps, *c.eta);
    }
    if (!c.k1 || !c.k_minus1 || !c.k2 || !c.e0) {
        throw UsageError("--k1 --k-1 --k2 --e0 must all be given");
    }
    RateConstants rc{*c.k1, *c.k_minus1, *c.k2, *c.e0, 0.0};
    return nondimensionalize(rc).params;
}

/// Tabular output, rendered as CSV (with a provenance comment) or JSON records.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // cells already formatted

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string render(const Table& t, const RunConfig& c, const Parameters& p, double tol) {
    if (c.format == "json") {
        json arr = json::array();
        for (const auto& row : t.rows) {
            json rec;
            for (std::size_t i = 0; i < t.header.size(); ++i) {
                const std::string& cell = row[i];
                const char* end = cell.data() + cell.size();
                long long n = 0;
                const auto ires = std::from_chars(cell.data(), end, n);
                if (ires.ec == std::errc() && ires.ptr == end) {
                    rec[t.header[i]] = n;
                    continue;
                }
                double v = 0.0;
                const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (res.ec == std::errc() && res.ptr == cell.data() + cell.size()) {
                    rec[t.header[i]] = v;
                } else {
                    rec[t.header[i]] = cell;
                }
            }
            arr.push_back(std::move(rec));
        }
        json doc;
        doc["eps"] = p.eps();
        doc["eta"] = p.eta();
        doc["version"] = kVersion;
        doc["tol"] = tol;
        doc["records"] = std::move(arr);
        return doc.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "# eps=" << fmt(p.eps()) << ", eta=" << fmt(p.eta()) << ", version=" << kVersion << ", tol=" << fmt(tol)
       << "\n";
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
    return os.str();
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
        f << content;
        if (!f) throw Error(ErrorKind::Io, "write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot move " + tmp.string() + " to " + path + ": " + ec.message());
}

void emit(const std::string& content, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << content;
    } else {
        write_atomic(path, content);
    }
}

/// JSON side reports: --report wins, otherwise next to --out, otherwise skipped.
void emit_report(const json& j, const RunConfig& c) {
    std::string path = c.report;
    if (path.empty() && !c.out.empty()) {
        path = std::filesystem::path(c.out).replace_extension(".json").string();
    }
    if (!path.empty()) write_atomic(path, j.dump(2) + "\n");
}

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

std::vector<Vec2> read_starts(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::Io, "cannot read starts file " + path);
    std::vector<Vec2> starts;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream is(line);
        double x = 0.0, y = 0.0;
        if (is >> x >> y) starts.push_back({x, y});
    }
    if (starts.empty()) throw Error(ErrorKind::Io, "no start points in " + path);
    return starts;
}

std::vector<Vec2> random_starts(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<Vec2> s;
    for (std::size_t i = 0; i < count; ++i) {
        const double x = u(rng);
        const double y = u(rng);
        s.push_back({x, y});
    }
    return s;
}

/// Starts spread over every row of the concavity table.
std::vector<Vec2> audit_starts() {
    std::vector<Vec2> s;
    for (double x : {0.05, 0.2, 0.5, 1.0, 2.0, 4.0}) {
        for (double y : {0.02, 0.3, 0.6, 0.9, 1.2, 2.0}) s.push_back({x, y});
    }
    for (double y : {0.95, 0.99, 1.5, 3.0}) s.push_back({0.01, y});
    return s;
}

SlowManifold manifold_for(const Parameters& p, const RunConfig& c) {
    ManifoldOptions o;
    o.x_min = c.x_min;
    o.x_max = c.x_max;
    o.grid_points = c.grid;
    o.tol = c.tol.value_or(1e-12);
    o.seed_order = std::min<std::size_t>(c.n, 8);
    return compute_manifold(p, o);
}

json spectrum_json(const Parameters& p) {
    const Spectrum s = spectrum(p);
    json j;
    j["eps"] = p.eps();
    j["eta"] = p.eta();
    j["lambda_plus"] = s.lambda_plus;
    j["lambda_minus"] = s.lambda_minus;
    j["kappa"] = s.kappa;
    j["sigma"] = s.sigma;
    j["v_plus"] = vec_json(s.v_plus);
    j["v_minus"] = vec_json(s.v_minus);
    j["vhat_plus"] = vec_json(s.vhat_plus);
    j["vhat_minus"] = vec_json(s.vhat_minus);
    j["resonance"] = {{"resonant", s.resonance.resonant},
                      {"near_resonant", s.resonance.near_resonant},
                      {"nearest_integer", s.resonance.nearest_integer},
                      {"distance", s.resonance.distance}};
    return j;
}

int cmd_spectral(const RunConfig& c, std::ostream& out) {
    const Parameters p = resolve(c);
    const json j = spectrum_json(p);
    if (c.format == "csv") {
        Table t{{"quantity", "value"}, {}};
        for (const char* key : {"lambda_plus", "lambda_minus", "kappa", "sigma"}) t.add({key, fmt(j[key].get<double>())});
        emit(render(t, c, p, 0.0), c.out, out);
    } else {
        emit(j.dump(2) + "\n", c.out, out);
    }
    return 0;
}

int cmd_isoclines(const RunConfig& c, std::ostream& out) {
    const Parameters p = resolve(c);
    const double sigma = spectrum(p).sigma;
    Table t{{"x", "H", "V", "alpha"}, {}};
    for (double s : c.slopes) t.header.push_back("F_" + fmt(s));
    for (double x : log_grid(c.x_min, c.x_max, c.grid)) {
        std::vector<std::string> row{fmt(x), fmt(horizontal_isocline(x)), fmt(vertical_isocline(p, x)),
                                     fmt(alpha_isocline(sigma, x))};
        for (double s : c.slopes) row.push_back(fmt(F(p, x, s)));
        t.add(std::move(row));
    }
    emit(render(t, c, p, 0.0), c.out, out);
    return 0;
}

int cmd_series(const RunConfig& c, std::ostream& out) {
    if (c.infinity && c.origin) throw UsageError("--infinity and --origin are exclusive");
    const Parameters p = resolve(c);
    Table t{{"n", c.infinity ? "rho" : "sigma"}, {}};
    if (c.infinity) {
        const InfinitySeries s = infinity_coefficients(p, c.n);
        for (std::size_t i = 0; i < s.coeffs.size(); ++i) t.add({std::to_string(i), fmt(s.coeffs[i])});
    } else {
        const OriginSeries s = origin_coefficients(p, c.n);
        for (std::size_t i = 0; i < s.coeffs.size(); ++i) t.add({std::to_string(i), fmt(s.coeffs[i])});
    }
    emit(render(t, c, p, 0.0), c.out, out);
    return 0;
}

int cmd_portrait(const RunConfig& c, std::ostream& out) {
    const Parameters p = resolve(c);
    std::vector<Vec2> starts;
    if (!c.starts.empty()) {
        starts = read_starts(c.starts);
    } else {
        for (double x : {0.5, 1.0, 1.5, 2.0}) {
            for (double y : {0.0, 0.5, 1.0, 1.5, 2.0}) starts.push_back({x, y});
        }
    }
    const Tolerance tol{c.tol.value_or(1e-10), 1e-12};
    Table t{{"start", "t", "x", "y"}, {}};
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const Trajectory traj = integrate_time(p, starts[i], c.t_end, tol);
        for (const auto& s : traj.samples) t.add({std::to_string(i), fmt(s.t), fmt(s.point.x), fmt(s.point.y)});
    }
    emit(render(t, c, p, tol.rel), c.out, out);
    return 0;
}

json fence_json(const FenceReport& f) {
    return {{"min_lower_margin", f.min_lower},
            {"min_upper_margin", f.min_upper},
            {"pass", f.pass},
            {"within_slack", f.within_slack},
            {"slack", kFenceSlack}};
}

int cmd_manifold(const RunConfig& c, std::ostream& out) {
    const Parameters p = resolve(c);
    const SlowManifold m = manifold_for(p, c);
    Table t{{"x", "M", "dM", "d2M"}, {}};
    const auto xs = m.offset.grid();
    const auto zs = m.offset.values();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const OffsetGeometry g = offset_geometry(p, xs[i], zs[i]);
        t.add({fmt(xs[i]), fmt(g.y), fmt(g.slope), fmt(g.curvature)});
    }
    emit(render(t, c, p, m.tol), c.out, out);

    json j;
    j["eps"] = p.eps();
    j["eta"] = p.eta();
    j["seed_order"] = m.seed_order;
    j["seed_value"] = m.seed_value;
    j["fence_margin"] = m.fence_margin;
    j["used_fallback"] = m.used_fallback;
    j["fences"] = fence_json(verify_fences(p, m));
    try {
        const TailFit tf = origin_tail(p, m);
        j["tail"] = {{"C", tf.C},          {"kappa_fit", tf.kappa_fit}, {"window_lo", tf.window_lo},
                     {"window_hi", tf.window_hi}, {"samples", tf.samples}, {"residual_norm", tf.residual_norm}};
    } catch (const Error& e) {
        j["tail"] = {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
    }
    emit_report(j, c);
    return 0;
}

json audit_json(const ConcavityAudit& a) {
    json rows = json::array();
    for (const auto& r : a.rows) {
        rows.push_back({{"row", std::string(to_string(r.row))},
                        {"expected", std::string(to_string(expected_concavity(r.row)))},
                        {"samples", r.samples},
                        {"checked", r.checked},
                        {"mismatches", r.mismatches},
                        {"excluded", r.excluded},
                        {"unresolved", r.unresolved},
                        {"model_disagreements", r.model_disagreements}});
    }
    return {{"rows", rows}, {"skipped", a.skipped}, {"pass", a.pass}};
}

int cmd_classify(const RunConfig& c, std::ostream& out) {
    const Parameters p = resolve(c);
    const SlowManifold m = manifold_for(p, c);
    const std::vector<Vec2> starts = c.starts.empty() ? audit_starts() : read_starts(c.starts);
    const ConcavityAudit a = concavity_audit(p, m, starts, c.t_end);
    json j = audit_json(a);
    j["eps"] = p.eps();
    j["eta"] = p.eta();
    emit(j.dump(2) + "\n", c.out, out);
    return 0;
}

int cmd_loci(const RunConfig& c, std::ostream& out) {
    const Parameters p = resolve(c);
    RunConfig mc = c;
    mc.x_min = std::min(c.x_min, 1e-3);
    mc.x_max = std::max(c.x_max, 1e3);
    mc.grid = 600;
    const SlowManifold m = manifold_for(p, mc);
    const InflectionLoci loci = inflection_locus(p, log_grid(c.x_min, c.x_max, c.grid), &m);
    Table t{{"x", "y", "branch", "h"}, {}};
    for (const auto& pt : loci.points) {
        t.add({fmt(pt.x), fmt(pt.y), std::string(to_string(pt.branch)), fmt(pt.h)});
    }
    emit(render(t, c, p, m.tol), c.out, out);
    return 0;
}

int cmd_entry(const RunConfig& c, std::ostream& out) {
    const Parameters p = resolve(c);
    const std::vector<Vec2> starts = c.starts.empty() ? random_starts(c.count, c.seed) : read_starts(c.starts);
    const Tolerance tol{c.tol.value_or(1e-10), 1e-200};
    json arr = json::array();
    for (const Vec2& s : starts) {
        const EntryReport r = gamma1_entry(p, s, c.t_end, tol);
        json j{{"start", vec_json(s)},
               {"outcome", std::string(to_string(r.outcome))},
               {"x_star", r.x_star},
               {"kappa_above_two", r.kappa_above_two},
               {"entry_guaranteed", r.entry_guaranteed}};
        if (r.outcome == EntryOutcome::Entered) j["t_enter"] = r.t_enter;
        if (r.outcome == EntryOutcome::NotEntered) j["t_decided"] = r.t_decided;
        if (r.v_crossing) j["v_crossing"] = {{"t", r.v_crossing->t}, {"point", vec_json(r.v_crossing->point)}};
        arr.push_back(std::move(j));
    }
    json j{{"eps", p.eps()}, {"eta", p.eta()}, {"horizon", c.t_end}, {"seed", c.seed}, {"classifications", arr}};
    emit(j.dump(2) + "\n", c.out, out);
    return 0;
}

int cmd_fraser(const RunConfig& c, std::ostream& out) {
    const Parameters p = resolve(c);
    const SlowManifold m = manifold_for(p, c);
    const std::vector<double> xs = log_grid(c.x_min, c.x_max, c.grid);
    std::vector<double> ys, ds;
    for (double x : xs) {
        ys.push_back(horizontal_isocline(x));
        ds.push_back(1.0 / ((1.0 + x) * (1.0 + x)));
    }
    const std::size_t n = std::max<std::size_t>(c.n, 1);
    const FraserIterates it = fraser_iterate(p, Curve::hermite(xs, ys, ds), n);
    Table t{{"x"}, {}};
    for (std::size_t k = 0; k < it.iterates.size(); ++k) t.header.push_back("y" + std::to_string(k));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::vector<std::string> row{fmt(xs[i])};
        for (const Curve& cv : it.iterates) row.push_back(fmt(cv.values()[i]));
        t.add(std::move(row));
    }
    emit(render(t, c, p, m.tol), c.out, out);
    json poles = json::array();
    for (const auto& ph : it.pole_hits) poles.push_back(ph.size());
    emit_report({{"eps", p.eps()},
                 {"eta", p.eta()},
                 {"window", json::array({c.lo, c.hi})},
                 {"sup_distance", it.sup_distance(m, c.lo, c.hi)},
                 {"pole_hits", poles},
                 {"edge_nodes", it.edge_nodes}},
                c);
    return 0;
}

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<Check> verify_suite(const Parameters& p, const RunConfig& c) {
    std::vector<Check> checks;
    auto add = [&](std::string name, bool pass, std::string detail) {
        checks.push_back({std::move(name), pass, std::move(detail)});
    };
    const Spectrum s = spectrum(p);
    add("eigenvalue_ordering", s.lambda_minus < -1.0 && -1.0 < s.lambda_plus && s.lambda_plus < 0.0,
        "lambda- = " + fmt(s.lambda_minus) + ", lambda+ = " + fmt(s.lambda_plus));
    add("sigma_bounds", 1.0 < s.sigma && s.sigma < 1.0 / (1.0 - p.eta()), "sigma = " + fmt(s.sigma));
    add("k_sigma_round_trip", std::abs(K(p, s.sigma) * s.sigma - 1.0) <= 1e-12, "");
    add("eta_round_trip", std::abs(eta_from_kappa(p.eps(), s.kappa) - p.eta()) <= 1e-12, "");

    const SlowManifold m = manifold_for(p, c);
    const FenceReport f = verify_fences(p, m);
    add("fence_sandwich", f.within_slack && f.pass,
        "min lower " + fmt(f.min_lower) + ", min upper " + fmt(f.min_upper));

    const auto xs = m.offset.grid();
    const auto zs = m.offset.values();
    bool increasing = true, concave = true, fixed_point = true;
    double worst_fixed = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const OffsetGeometry g = offset_geometry(p, xs[i], zs[i]);
        if (i > 0 && !(m.curve.values()[i] > m.curve.values()[i - 1])) increasing = false;
        if (!(g.curvature < 0.0)) concave = false;
        const double err = std::abs(F(p, xs[i], g.slope) - g.y);
        worst_fixed = std::max(worst_fixed, err);
        if (err > 1e-9) fixed_point = false;
    }
    add("manifold_increasing", increasing, "");
    add("manifold_concave", concave, "");
    add("fraser_fixed_point", fixed_point, "max |F(x, M') - M| = " + fmt(worst_fixed));
    if (m.curve.x_min() <= 1e-3) add("limit_at_zero", m.curve.values().front() < 1e-2, "");
    if (m.curve.x_max() >= 1e3) {
        add("limit_at_infinity", std::abs(m.curve.values().back() - 1.0) < 2.0 / m.curve.x_max(), "");
    }

    const double x_probe = std::max(1.0, m.curve.x_min());
    const auto up = perturbed_exit(p, m, x_probe, 1e-6, m.curve.x_max());
    const auto down = perturbed_exit(p, m, x_probe, -1e-6, m.curve.x_max());
    const double limit = m.curve.x_max() / 10.0;
    add("uniqueness_probe", up && down && *up < limit && *down < limit,
        "exits at " + (up ? fmt(*up) : std::string("none")) + " and " + (down ? fmt(*down) : std::string("none")));

    const InflectionLoci loci = inflection_locus(p, log_grid(0.01, 5.0, 200), &m);
    double worst_h = 0.0;
    std::size_t between = 0, above = 0, other = 0;
    for (const auto& pt : loci.points) {
        if (pt.branch == LocusBranch::BetweenMAlpha) ++between;
        if (pt.branch == LocusBranch::AboveOne) ++above;
        if (pt.branch == LocusBranch::Other || pt.branch == LocusBranch::OnV) ++other;
        if (pt.y >= 0.0 && pt.branch != LocusBranch::OnV) {
            worst_h = std::max(worst_h, std::abs(pt.h) / (1.0 + std::abs(pt.y)));
        }
    }
    add("inflection_backsubstitution", worst_h < 1e-9, "max |h|/(1+|y|) = " + fmt(worst_h));
    add("inflection_branches", between == 200 && above == 200 && other == 0,
        std::to_string(between) + " between M and alpha, " + std::to_string(above) + " above one, " +
            std::to_string(other) + " other");

    const ConcavityAudit a = concavity_audit(p, m, audit_starts(), 50.0);
    std::size_t mism = 0;
    for (const auto& r : a.rows) mism += r.mismatches;
    add("concavity_audit", a.pass, std::to_string(mism) + " mismatches");

    if (!s.resonance.resonant && std::abs(s.kappa - 2.0) > 0.05) {
        const OriginSeries os = origin_coefficients(p, 2);
        const bool positive = os.coeffs[2] > 0.0;
        add("sigma2_sign_law", positive == (s.kappa < 2.0), "sigma_2 = " + fmt(os.coeffs[2]));
    }
    if (!s.resonance.resonant && s.kappa > 2.0) {
        std::size_t entered = 0;
        const auto starts = random_starts(20, c.seed);
        for (const Vec2& st : starts) {
            if (gamma1_entry(p, st, c.t_end).outcome == EntryOutcome::Entered) ++entered;
        }
        add("gamma1_entry_sweep", entered == starts.size(), std::to_string(entered) + " of 20 entered");
    }
    return checks;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
    const Parameters p = resolve(c);
    const std::vector<Check> checks = verify_suite(p, c);
    json arr = json::array();
    bool all = true;
    for (const auto& ch : checks) {
        all = all && ch.pass;
        arr.push_back({{"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
    }
    const json j{{"eps", p.eps()}, {"eta", p.eta()}, {"checks", arr}, {"pass", all}};
    emit(j.dump(2) + "\n", c.out, out);
    return all ? 0 : 1;
}

void error_json(std::ostream& err, std::string_view kind, const std::string& message) {
    err << json{{"error", std::string(kind)}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Planar Michaelis-Menten phase-plane toolkit", "mmphase"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    auto common = [&](CLI::App* sub) {
        sub->add_option("--eps", c.eps, "eps > 0");
        sub->add_option("--eta", c.eta, "0 < eta < 1");
        sub->add_option("--k1", c.k1, "binding rate constant");
        sub->add_option("--k-1", c.k_minus1, "unbinding rate constant");
        sub->add_option("--k2", c.k2, "catalytic rate constant");
        sub->add_option("--e0", c.e0, "total enzyme");
        sub->add_option("--out", c.out, "output file (default stdout)");
        sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--tol", c.tol, "relative integration tolerance")->check(CLI::Range(1e-14, 1e-3));
    };
    auto grid = [&](CLI::App* sub) {
        sub->add_option("--x-min", c.x_min, "left end of the x grid")->check(CLI::PositiveNumber);
        sub->add_option("--x-max", c.x_max, "right end of the x grid")->check(CLI::PositiveNumber);
        sub->add_option("--grid", c.grid, "number of log-spaced grid points")->check(CLI::Range(2, 1000000));
    };

    auto* spectral = app.add_subcommand("spectral", "eigenstructure at the origin (JSON)");
    common(spectral);

    auto* iso = app.add_subcommand("isoclines", "H, V, alpha and F(., c) on a log grid");
    common(iso);
    grid(iso);
    iso->add_option("--slope", c.slopes, "extra isocline slopes c");

    auto* series = app.add_subcommand("series", "origin or infinity series coefficients");
    common(series);
    series->add_option("--n", c.n, "highest order")->check(CLI::Range(1, 200));
    series->add_flag("--infinity", c.infinity, "rho_n at infinity");
    series->add_flag("--origin", c.origin, "sigma_n at the origin (default)");

    auto* portrait = app.add_subcommand("portrait", "time-form trajectories from a start list");
    common(portrait);
    portrait->add_option("--starts", c.starts, "CSV of x0,y0 rows")->check(CLI::ExistingFile);
    portrait->add_option("--t-end", c.t_end, "integration horizon")->check(CLI::PositiveNumber);

    auto* manifold = app.add_subcommand("manifold", "slow manifold CSV plus fence/tail JSON");
    common(manifold);
    grid(manifold);
    manifold->add_option("--n", c.n, "infinity-series seed order (<= 8)")->check(CLI::Range(0, 8));
    manifold->add_option("--report", c.report, "fence/tail JSON path (default: --out with .json)");

    auto* classify = app.add_subcommand("classify", "concavity table audit (JSON)");
    common(classify);
    classify->add_option("--starts", c.starts, "CSV of x0,y0 rows")->check(CLI::ExistingFile);
    classify->add_option("--t-end", c.t_end, "integration horizon")->check(CLI::PositiveNumber);

    auto* loci = app.add_subcommand("loci", "inflection loci branches");
    common(loci);
    grid(loci);

    auto* entry = app.add_subcommand("entry", "Gamma1 entry classification (JSON)");
    common(entry);
    entry->add_option("--starts", c.starts, "CSV of x0,y0 rows")->check(CLI::ExistingFile);
    entry->add_option("--count", c.count, "random starts in [0,2]^2 when no --starts")->check(CLI::Range(1, 100000));
    entry->add_option("--seed", c.seed, "seed for random starts");
    entry->add_option("--t-end", c.t_end, "horizon")->check(CLI::PositiveNumber);

    auto* fraser = app.add_subcommand("fraser", "Fraser iterates from H plus distance JSON");
    common(fraser);
    grid(fraser);
    fraser->add_option("--n", c.n, "number of iterates")->check(CLI::Range(1, 100));
    fraser->add_option("--report", c.report, "distance JSON path (default: --out with .json)");
    fraser->add_option("--lo", c.lo, "distance window left end");
    fraser->add_option("--hi", c.hi, "distance window right end");

    auto* verify = app.add_subcommand("verify", "invariant suite; exit 0 iff all pass");
    common(verify);
    verify->add_option("--seed", c.seed, "seed for the entry sweep");
    verify->add_option("--t-end", c.t_end, "entry horizon")->check(CLI::PositiveNumber);

    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        error_json(err, "usage", e.what());
        return 2;
    }
    if (c.format.empty()) c.format = app.got_subcommand(spectral) ? "json" : "csv";
    if (c.x_max <= c.x_min) {
        error_json(err, "usage", "--x-max must exceed --x-min");
        return 2;
    }

    try {
        if (app.got_subcommand(spectral)) return cmd_spectral(c, out);
        if (app.got_subcommand(iso)) return cmd_isoclines(c, out);
        if (app.got_subcommand(series)) return cmd_series(c, out);
        if (app.got_subcommand(portrait)) return cmd_portrait(c, out);
        if (app.got_subcommand(manifold)) return cmd_manifold(c, out);
        if (app.got_subcommand(classify)) return cmd_classify(c, out);
        if (app.got_subcommand(loci)) return cmd_loci(c, out);
        if (app.got_subcommand(entry)) return cmd_entry(c, out);
        if (app.got_subcommand(fraser)) return cmd_fraser(c, out);
        if (app.got_subcommand(verify)) return cmd_verify(c, out);
    } catch (const UsageError& e) {
        error_json(err, "usage", e.what());
        return 2;
    } catch (const Error& e) {
        const bool bad_input = e.kind() == ErrorKind::InvalidParameters || e.kind() == ErrorKind::InadmissibleEta;
        error_json(err, to_string(e.kind()), e.what());
        return bad_input ? 2 : 1;
    } catch (const std::exception& e) {
        error_json(err, "internal", e.what());
        return 1;
    }
    return 2;
}

}  // namespace mmphase::cli
