// Command-line front end.
//
// Exit codes: 0 success, 1 a verification ran and failed its tolerance,
// 2 usage or input errors (bad flags, unparseable metric files), 3 runtime
// evaluation errors (points outside the chart, metric not positive definite,
// integrator monitor trips).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ricci3/ricci3.hpp"

namespace {

using namespace ricci3;

std::string num(double v) {
    char b[64];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

std::string short_num(double v) {
    char b[64];
    std::snprintf(b, sizeof b, "%.6g", v);
    return b;
}

unsigned worker_count() {
    const char* env = std::getenv("RICCI3_THREADS");
    if (!env)
        return 1;
    long v = std::strtol(env, nullptr, 10);
    if (v < 1)
        v = 1;
    if (v > 64)
        v = 64;
    return static_cast<unsigned>(v);
}

// Static index partition over a fixed-size result vector: output order never
// depends on the thread count.
template <class F>
void parallel_for(size_t n, F&& f) {
    const size_t threads = std::min<size_t>(worker_count(), n == 0 ? 1 : n);
    if (threads <= 1) {
        for (size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first;
    std::mutex m;
    for (size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (size_t i = t; i < n; i += threads)
                    f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!first)
                    first = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (first)
        std::rethrow_exception(first);
}

enum class Format { Text, Csv, JsonLines };

Format parse_format(const std::string& s) {
    if (s == "text")
        return Format::Text;
    if (s == "csv")
        return Format::Csv;
    if (s == "json-lines" || s == "jsonl")
        return Format::JsonLines;
    throw CLI::ValidationError("--format", "expected text, csv, or json-lines");
}

struct Geometry {
    MetricChart chart;
    std::optional<FrameField> frame;
    std::string label;
};

Vec3 parse_point(const std::string& text) {
    Vec3 p{};
    std::istringstream is(text);
    char c1 = 0, c2 = 0;
    if (!(is >> p[0] >> c1 >> p[1] >> c2 >> p[2]) || c1 != ',' || c2 != ',')
        throw CLI::ValidationError("--point", "expected three comma-separated numbers");
    std::string rest;
    if (is >> rest)
        throw CLI::ValidationError("--point", "trailing characters after the third coordinate");
    return p;
}

ParamMap parse_param_overrides(const std::vector<std::string>& kvs) {
    ParamMap out;
    for (const std::string& kv : kvs) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw CLI::ValidationError("--param", "expected NAME=VALUE, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        size_t used = 0;
        double val = 0.0;
        try {
            val = std::stod(kv.substr(eq + 1), &used);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--param", "bad numeric value in '" + kv + "'");
        }
        if (used != kv.size() - eq - 1)
            throw CLI::ValidationError("--param", "bad numeric value in '" + kv + "'");
        out[key] = val;
    }
    return out;
}

Geometry resolve_geometry(const std::string& catalog_name, const std::string& metric_path,
                          const std::vector<std::string>& params, const std::string& field) {
    if (catalog_name.empty() == metric_path.empty())
        throw CLI::ValidationError("--catalog/--metric", "exactly one of --catalog and --metric is required");
    const ParamMap overrides = parse_param_overrides(params);

    Geometry g;
    if (!catalog_name.empty()) {
        CatalogEntry entry = catalog_metric(catalog_name, overrides);
        g.chart = entry.chart;
        g.label = entry.name;
        if (field.empty() || field == "default") {
            g.frame = entry.frame;
        } else {
            auto it = entry.named_frames.find(field);
            if (it == entry.named_frames.end())
                throw CLI::ValidationError("--field",
                                           "metric '" + catalog_name + "' has no frame named '" + field + "'");
            g.frame = it->second;
        }
    } else {
        std::ifstream in(metric_path);
        if (!in)
            throw ChartError("cannot open metric file '" + metric_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        MetricFile mf = parse_metric_file(ss.str(), metric_path);
        g.chart = mf.chart;
        g.frame = mf.frame;
        g.label = g.chart.name.empty() ? metric_path : g.chart.name;
        if (!field.empty() && field != "default")
            throw CLI::ValidationError("--field", "named frames exist only on catalog metrics");
        for (const auto& [k, v] : overrides) {
            if (!g.chart.params.count(k))
                throw ChartError("metric file declares no parameter '" + k + "'");
            g.chart.params[k] = v;
        }
    }
    return g;
}

std::vector<Vec3> sample_points(const MetricChart& chart, int samples, uint64_t seed,
                                const std::optional<Vec3>& single) {
    if (single)
        return {*single};
    if (samples < 1)
        throw CLI::ValidationError("--samples", "needs at least one sample");
    SplitMix64 rng(seed);
    std::vector<Vec3> pts;
    pts.reserve(static_cast<size_t>(samples));
    for (int i = 0; i < samples; ++i)
        pts.push_back(chart.domain.sample(rng));
    return pts;
}

std::string csv_quote(const std::string& s) { return "\"" + s + "\""; }

// ---- report -----------------------------------------------------------------

struct ReportRow {
    Vec3 p{};
    double S = 0.0;
    Vec3 lam{};
    std::string signature;
    bool has_frame = false;
    SpinCoefficients sc{};
    double det_d = 0.0, H = 0.0;
};

int run_report(const Geometry& g, const std::vector<Vec3>& pts, Format fmt, double eps_sig) {
    std::vector<ReportRow> rows(pts.size());
    parallel_for(pts.size(), [&](size_t i) {
        ReportRow& r = rows[i];
        r.p = pts[i];
        const CurvaturePack pack = curvature(g.chart, pts[i]);
        r.S = pack.scalar;
        const PrincipalRicci pr = principal_ricci(pack, eps_sig);
        r.lam = pr.values;
        r.signature = pr.signature;
        if (g.frame) {
            r.has_frame = true;
            r.sc = spin_coefficients(g.chart, pts[i], *g.frame);
            const DMatrix d = d_matrix(g.chart, pts[i], *g.frame);
            r.det_d = d.det;
            r.H = h_function(d, -pr.values[0]);
        }
    });

    if (fmt == Format::Csv) {
        std::string head = "x,y,z,S,lam1,lam2,lam3,signature";
        if (!rows.empty() && rows[0].has_frame)
            head += ",div_k,omega,kappa_re,kappa_im,rho_re,rho_im,sigma_re,sigma_im,eps_re,eps_im,"
                    "beta_re,beta_im,abs_sigma2,det_d,H";
        std::cout << head << "\n";
        for (const ReportRow& r : rows) {
            std::cout << num(r.p[0]) << ',' << num(r.p[1]) << ',' << num(r.p[2]) << ',' << num(r.S) << ','
                      << num(r.lam[0]) << ',' << num(r.lam[1]) << ',' << num(r.lam[2]) << ','
                      << csv_quote(r.signature);
            if (r.has_frame) {
                std::cout << ',' << num(r.sc.div_k) << ',' << num(r.sc.omega) << ',' << num(r.sc.kappa.real())
                          << ',' << num(r.sc.kappa.imag()) << ',' << num(r.sc.rho.real()) << ','
                          << num(r.sc.rho.imag()) << ',' << num(r.sc.sigma.real()) << ','
                          << num(r.sc.sigma.imag()) << ',' << num(r.sc.eps.real()) << ','
                          << num(r.sc.eps.imag()) << ',' << num(r.sc.beta.real()) << ','
                          << num(r.sc.beta.imag()) << ',' << num(r.sc.abs_sigma_sq) << ',' << num(r.det_d)
                          << ',' << num(r.H);
            }
            std::cout << "\n";
        }
    } else if (fmt == Format::JsonLines) {
        for (const ReportRow& r : rows) {
            std::cout << "{\"point\":[" << num(r.p[0]) << ',' << num(r.p[1]) << ',' << num(r.p[2])
                      << "],\"S\":" << num(r.S) << ",\"principal_ricci\":[" << num(r.lam[0]) << ','
                      << num(r.lam[1]) << ',' << num(r.lam[2]) << "],\"signature\":\"" << r.signature << "\"";
            if (r.has_frame) {
                auto cplx = [](std::complex<double> z) {
                    return "[" + num(z.real()) + "," + num(z.imag()) + "]";
                };
                std::cout << ",\"div_k\":" << num(r.sc.div_k) << ",\"omega\":" << num(r.sc.omega)
                          << ",\"kappa\":" << cplx(r.sc.kappa) << ",\"rho\":" << cplx(r.sc.rho)
                          << ",\"sigma\":" << cplx(r.sc.sigma) << ",\"eps\":" << cplx(r.sc.eps)
                          << ",\"beta\":" << cplx(r.sc.beta) << ",\"abs_sigma2\":" << num(r.sc.abs_sigma_sq)
                          << ",\"det_d\":" << num(r.det_d) << ",\"H\":" << num(r.H);
            }
            std::cout << "}\n";
        }
    } else {
        for (const ReportRow& r : rows) {
            std::cout << "point (" << num(r.p[0]) << ", " << num(r.p[1]) << ", " << num(r.p[2]) << ")\n";
            std::cout << "  scalar curvature  " << num(r.S) << "\n";
            std::cout << "  principal ricci   " << num(r.lam[0]) << "  " << num(r.lam[1]) << "  "
                      << num(r.lam[2]) << "\n";
            std::cout << "  signature         " << r.signature << "\n";
            if (r.has_frame) {
                auto cplx = [](std::complex<double> z) {
                    return num(z.real()) + (z.imag() < 0 ? " - " : " + ") + num(std::abs(z.imag())) + "i";
                };
                std::cout << "  div k             " << num(r.sc.div_k) << "\n";
                std::cout << "  omega             " << num(r.sc.omega) << "\n";
                std::cout << "  kappa             " << cplx(r.sc.kappa) << "\n";
                std::cout << "  rho               " << cplx(r.sc.rho) << "\n";
                std::cout << "  sigma             " << cplx(r.sc.sigma) << "\n";
                std::cout << "  eps               " << cplx(r.sc.eps) << "\n";
                std::cout << "  beta              " << cplx(r.sc.beta) << "\n";
                std::cout << "  |sigma|^2         " << num(r.sc.abs_sigma_sq) << "\n";
                std::cout << "  det D             " << num(r.det_d) << "\n";
                std::cout << "  H                 " << num(r.H) << "\n";
            }
        }
    }
    return 0;
}

// ---- verify -----------------------------------------------------------------

int run_verify(const Geometry& g, const std::vector<Vec3>& pts, Format fmt, double tol, double h_rel,
               const std::string& scenario_id) {
    if (!g.frame)
        throw CLI::ValidationError("verify", "a frame is required ([frame] section or a catalog metric)");

    if (!scenario_id.empty()) {
        ScenarioOptions opts;
        opts.h_rel = h_rel;
        const Scenario sc = scenario_from_name(scenario_id);
        const ScenarioReport rep = scenario_residuals(g.chart, pts, *g.frame, sc, opts);
        bool failed = false;
        if (fmt == Format::Csv) {
            std::cout << "kind,label,status,value,scale\n";
            for (const HypothesisFlag& hf : rep.hypotheses)
                std::cout << "hypothesis," << csv_quote(hf.label) << ',' << (hf.passed ? "pass" : "fail")
                          << ',' << num(hf.measure) << ",\n";
            for (const ScenarioCheck& c : rep.checks) {
                const bool ok = !c.applicable || c.residual <= tol * std::max(1.0, c.scale);
                if (c.applicable && !ok)
                    failed = true;
                std::cout << "check," << csv_quote(c.label) << ','
                          << (!c.applicable ? "n/a" : ok ? "pass" : "fail") << ',' << num(c.residual) << ','
                          << num(c.scale) << "\n";
            }
        } else if (fmt == Format::JsonLines) {
            for (const HypothesisFlag& hf : rep.hypotheses)
                std::cout << "{\"kind\":\"hypothesis\",\"label\":\"" << hf.label << "\",\"passed\":"
                          << (hf.passed ? "true" : "false") << ",\"measure\":" << num(hf.measure) << "}\n";
            for (const ScenarioCheck& c : rep.checks) {
                const bool ok = !c.applicable || c.residual <= tol * std::max(1.0, c.scale);
                if (c.applicable && !ok)
                    failed = true;
                std::cout << "{\"kind\":\"check\",\"label\":\"" << c.label << "\",\"applicable\":"
                          << (c.applicable ? "true" : "false") << ",\"residual\":" << num(c.residual)
                          << ",\"scale\":" << num(c.scale) << "}\n";
            }
        } else {
            std::cout << "scenario " << scenario_name(sc) << " on " << g.label << ": "
                      << (rep.applicable ? "APPLICABLE" : "NOT-APPLICABLE") << "\n";
            for (const HypothesisFlag& hf : rep.hypotheses)
                std::cout << "  hypothesis  " << (hf.passed ? "pass " : "FAIL ") << hf.label
                          << "  (measure " << short_num(hf.measure) << ")\n";
            for (const ScenarioCheck& c : rep.checks) {
                if (!c.applicable) {
                    std::cout << "  check       n/a  " << c.label << "\n";
                    continue;
                }
                const bool ok = c.residual <= tol * std::max(1.0, c.scale);
                if (!ok)
                    failed = true;
                std::cout << "  check       " << (ok ? "pass " : "FAIL ") << c.label << "  (max residual "
                          << short_num(c.residual) << ", scale " << short_num(c.scale) << ")\n";
            }
        }
        return failed ? 1 : 0;
    }

    static const char* labels[7] = {"S1", "S2", "S3", "S4", "S5", "bid1", "bid2"};
    struct Agg {
        double max_abs = 0.0, max_scale = 0.0, max_rel = 0.0;
    };
    std::vector<std::array<ResidualItem, 7>> per_point(pts.size());
    IdentityOptions opts;
    opts.h_rel = h_rel;
    parallel_for(pts.size(), [&](size_t i) {
        per_point[i] = all_identity_residuals(g.chart, pts[i], *g.frame, opts);
    });
    Agg agg[7];
    for (const auto& items : per_point) {
        for (int k = 0; k < 7; ++k) {
            agg[k].max_abs = std::max(agg[k].max_abs, std::abs(items[static_cast<size_t>(k)].residual));
            agg[k].max_scale = std::max(agg[k].max_scale, items[static_cast<size_t>(k)].scale);
            agg[k].max_rel = std::max(agg[k].max_rel, items[static_cast<size_t>(k)].relative());
        }
    }

    bool failed = false;
    if (fmt == Format::Csv) {
        std::cout << "label,max_residual,max_scale,max_relative\n";
        for (int k = 0; k < 7; ++k)
            std::cout << labels[k] << ',' << num(agg[k].max_abs) << ',' << num(agg[k].max_scale) << ','
                      << num(agg[k].max_rel) << "\n";
        for (int k = 0; k < 7; ++k)
            failed |= agg[k].max_rel > tol;
    } else if (fmt == Format::JsonLines) {
        for (int k = 0; k < 7; ++k) {
            const bool ok = agg[k].max_rel <= tol;
            failed |= !ok;
            std::cout << "{\"label\":\"" << labels[k] << "\",\"max_residual\":" << num(agg[k].max_abs)
                      << ",\"max_scale\":" << num(agg[k].max_scale) << ",\"max_relative\":"
                      << num(agg[k].max_rel) << ",\"pass\":" << (ok ? "true" : "false") << "}\n";
        }
    } else {
        std::cout << "verify " << g.label << "  points=" << pts.size() << "  tol=" << short_num(tol) << "\n";
        for (int k = 0; k < 7; ++k) {
            const bool ok = agg[k].max_rel <= tol;
            failed |= !ok;
            std::printf("  %-5s max|residual| %-12.6g scale %-12.6g relative %-12.6g %s\n", labels[k],
                        agg[k].max_abs, agg[k].max_scale, agg[k].max_rel, ok ? "ok" : "FAIL");
        }
        std::cout << (failed ? "verification FAILED\n" : "all identities within tolerance\n");
    }
    return failed ? 1 : 0;
}

// ---- classify -----------------------------------------------------------------

int run_classify(const Geometry& g, const std::vector<Vec3>& pts, Format fmt, double eps_sig) {
    std::vector<std::pair<std::string, Vec3>> rows(pts.size());
    parallel_for(pts.size(), [&](size_t i) {
        const PrincipalRicci pr = principal_ricci(g.chart, pts[i], eps_sig);
        rows[i] = {pr.signature, pr.values};
    });
    std::map<std::string, std::pair<size_t, Vec3>> counts;
    for (const auto& [sig, lam] : rows) {
        auto it = counts.find(sig);
        if (it == counts.end())
            counts.emplace(sig, std::make_pair(size_t{1}, lam));
        else
            it->second.first += 1;
    }
    if (fmt == Format::Csv) {
        std::cout << "signature,count,lam1,lam2,lam3\n";
        for (const auto& [sig, cv] : counts)
            std::cout << csv_quote(sig) << ',' << cv.first << ',' << num(cv.second[0]) << ','
                      << num(cv.second[1]) << ',' << num(cv.second[2]) << "\n";
    } else if (fmt == Format::JsonLines) {
        for (const auto& [sig, cv] : counts)
            std::cout << "{\"signature\":\"" << sig << "\",\"count\":" << cv.first
                      << ",\"principal_ricci\":[" << num(cv.second[0]) << ',' << num(cv.second[1]) << ','
                      << num(cv.second[2]) << "]}\n";
    } else {
        std::cout << "classify " << g.label << "  points=" << pts.size() << "\n";
        for (const auto& [sig, cv] : counts)
            std::cout << "  " << sig << "  x" << cv.first << "   e.g. principal ricci ("
                      << short_num(cv.second[0]) << ", " << short_num(cv.second[1]) << ", "
                      << short_num(cv.second[2]) << ")\n";
        if (counts.size() == 1)
            std::cout << "uniform signature over the sample\n";
    }
    return 0;
}

// ---- flow ---------------------------------------------------------------------

int run_flow(const Geometry& g, const Vec3& p0, Format fmt, double dt, double s_max,
             const std::optional<double>& mu) {
    if (!g.frame)
        throw CLI::ValidationError("flow", "a frame is required ([frame] section or a catalog metric)");
    FlowOptions opts;
    opts.dt = dt;
    opts.s_max = s_max;
    opts.mu = mu;
    const Trajectory traj = integrate_flow(g.chart, *g.frame, p0, opts);
    const EvolutionResiduals ev = evolution_residuals(traj);

    if (fmt == Format::Csv) {
        std::cout << "s,theta,omega,sigma_abs2,rho_abs2,H,S,res_theta,res_omega,res_sigma_abs2,"
                     "res_rho_abs2,res_H\n";
        for (size_t i = 0; i < traj.samples.size(); ++i) {
            const FlowSample& s = traj.samples[i];
            std::cout << num(s.s) << ',' << num(s.theta) << ',' << num(s.omega) << ',' << num(s.sigma_abs2)
                      << ',' << num(s.rho_abs2) << ',' << num(s.H) << ',' << num(s.S) << ','
                      << num(ev.theta[i]) << ',' << num(ev.omega[i]) << ',' << num(ev.sigma_abs2[i]) << ','
                      << num(ev.rho_abs2[i]) << ',' << num(ev.H[i]) << "\n";
        }
    } else if (fmt == Format::JsonLines) {
        for (size_t i = 0; i < traj.samples.size(); ++i) {
            const FlowSample& s = traj.samples[i];
            std::cout << "{\"s\":" << num(s.s) << ",\"theta\":" << num(s.theta) << ",\"omega\":"
                      << num(s.omega) << ",\"sigma_abs2\":" << num(s.sigma_abs2) << ",\"rho_abs2\":"
                      << num(s.rho_abs2) << ",\"H\":" << num(s.H) << ",\"S\":" << num(s.S) << "}\n";
        }
    } else {
        std::cout << "flow " << g.label << " from (" << num(p0[0]) << ", " << num(p0[1]) << ", "
                  << num(p0[2]) << ")  dt=" << short_num(dt) << "  s_max=" << short_num(s_max) << "\n";
        std::cout << "  samples             " << traj.samples.size() << "\n";
        std::cout << "  mu                  " << num(traj.mu) << "\n";
        std::cout << "  stopped at boundary " << (traj.hit_boundary ? "yes" : "no") << "\n";
        std::cout << "  max frame drift     " << short_num(traj.max_frame_drift) << "\n";
        std::cout << "  max |res theta|     " << short_num(ev.max_theta) << "\n";
        std::cout << "  max |res omega|     " << short_num(ev.max_omega) << "\n";
        std::cout << "  max |res sigma^2|   " << short_num(ev.max_sigma_abs2) << "\n";
        std::cout << "  max |res rho^2|     " << short_num(ev.max_rho_abs2) << "\n";
        std::cout << "  max |res H|         " << short_num(ev.max_H) << "\n";
    }
    return 0;
}

int run_ode(const std::string& id, Format fmt, double dt) {
    const std::vector<OdeCase> suite = ode_suite();
    const OdeCase& c = ode_case(suite, id);
    const OdeSolution sol = integrate_ode(c, dt);
    if (fmt == Format::Csv) {
        std::cout << "s,numeric,closed_form,abs_err\n";
        for (size_t i = 0; i < sol.s.size(); ++i) {
            const double cf = c.closed_form(sol.s[i]);
            std::cout << num(sol.s[i]) << ',' << num(sol.y[i]) << ',' << num(cf) << ','
                      << num(std::abs(sol.y[i] - cf)) << "\n";
        }
    } else if (fmt == Format::JsonLines) {
        for (size_t i = 0; i < sol.s.size(); ++i) {
            const double cf = c.closed_form(sol.s[i]);
            std::cout << "{\"s\":" << num(sol.s[i]) << ",\"numeric\":" << num(sol.y[i])
                      << ",\"closed_form\":" << num(cf) << ",\"abs_err\":" << num(std::abs(sol.y[i] - cf))
                      << "}\n";
        }
    } else {
        std::cout << "comparison problem " << c.id << ": " << c.description << "\n";
        std::cout << "  interval               [" << short_num(c.s0) << ", " << short_num(c.s1) << "]\n";
        std::cout << "  dt                     " << short_num(dt) << "\n";
        std::cout << "  max |numeric - closed| " << short_num(sol.max_abs_err) << "\n";
        std::cout << "  substitution residual  " << short_num(substitution_residual(c)) << "\n";
    }
    return 0;
}

// ---- catalog ------------------------------------------------------------------

int run_catalog_list(Format fmt) {
    for (const std::string& name : catalog_names()) {
        const CatalogEntry e = catalog_metric(name);
        std::string params;
        for (const auto& [k, v] : e.chart.params)
            params += (params.empty() ? "" : ", ") + k + "=" + short_num(v);
        if (fmt == Format::JsonLines) {
            std::cout << "{\"name\":\"" << e.name << "\",\"params\":\"" << params
                      << "\",\"expected_principal_ricci\":[\"" << e.expected_eigen_expr[0] << "\",\""
                      << e.expected_eigen_expr[1] << "\",\"" << e.expected_eigen_expr[2] << "\"]}\n";
        } else {
            std::printf("  %-20s %-12s expected principal ricci (%s, %s, %s)\n", e.name.c_str(),
                        params.empty() ? "-" : params.c_str(), e.expected_eigen_expr[0].c_str(),
                        e.expected_eigen_expr[1].c_str(), e.expected_eigen_expr[2].c_str());
        }
    }
    return 0;
}

int run_catalog_show(const std::string& name, const std::vector<std::string>& params) {
    const CatalogEntry e = catalog_metric(name, parse_param_overrides(params));
    std::cout << emit_metric_file(e.chart, e.frame);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"curvature, frame kinematics, and flow diagnostics for metric charts on 3-manifolds"};
    app.require_subcommand(1);

    std::string catalog_name, metric_path, field, format_s = "text", point_s, scenario_id, ode_id;
    std::vector<std::string> params;
    int samples = 20;
    uint64_t seed = 0;
    double tol = 1e-6, h_rel = 1e-4, eps_sig = 1e-7;
    double dt = 1e-3, s_max = 5.0;
    std::optional<double> mu_override;
    double mu_value = 0.0;

    auto add_geometry_opts = [&](CLI::App* cmd, bool with_field = true) {
        cmd->add_option("--catalog", catalog_name, "built-in metric name (see 'catalog list')");
        cmd->add_option("--metric", metric_path, "metric spec file");
        cmd->add_option("--param", params, "override a metric parameter, NAME=VALUE")->take_all();
        if (with_field)
            cmd->add_option("--field", field, "named frame on a catalog metric (e.g. hopf)");
        cmd->add_option("--format", format_s, "text, csv, or json-lines");
    };
    auto add_sampling_opts = [&](CLI::App* cmd) {
        cmd->add_option("--samples", samples, "number of sampled points");
        cmd->add_option("--seed", seed, "sampling seed");
        cmd->add_option("--point", point_s, "single evaluation point x,y,z (overrides sampling)");
    };

    CLI::App* report = app.add_subcommand("report", "curvature and frame scalars at sampled points");
    add_geometry_opts(report);
    add_sampling_opts(report);
    report->add_option("--eps-sig", eps_sig, "eigenvalue zero threshold for signatures");

    CLI::App* verify = app.add_subcommand("verify", "check the structure-equation residuals");
    add_geometry_opts(verify);
    add_sampling_opts(verify);
    verify->add_option("--tol", tol, "maximum allowed relative residual");
    verify->add_option("--h-rel", h_rel, "difference step relative to the domain size");
    verify->add_option("--scenario", scenario_id, "gated scenario: thm1, thm2-constant, thm2-closed, thm3");

    CLI::App* classify = app.add_subcommand("classify", "principal Ricci signatures over a sample");
    add_geometry_opts(classify, false);
    add_sampling_opts(classify);
    classify->add_option("--eps-sig", eps_sig, "eigenvalue zero threshold for signatures");

    CLI::App* flow = app.add_subcommand("flow", "integrate the k-flow or a scalar comparison problem");
    add_geometry_opts(flow);
    flow->add_option("--point", point_s, "start point x,y,z");
    flow->add_option("--dt", dt, "step size");
    flow->add_option("--smax", s_max, "parameter length");
    CLI::Option* mu_opt = flow->add_option("--mu", mu_value, "H offset (default: -Ric(k,k) at the start)");
    flow->add_option("--ode", ode_id,
                     "integrate a named comparison problem instead (ray3, tanh-closed-form, raylast, "
                     "g-decay, ell-affine, ell-jacobi, h-concave)");

    CLI::App* catalog = app.add_subcommand("catalog", "built-in metrics");
    catalog->require_subcommand(1);
    CLI::App* cat_list = catalog->add_subcommand("list", "list built-in metrics");
    cat_list->add_option("--format", format_s, "text or json-lines");
    CLI::App* cat_show = catalog->add_subcommand("show", "emit a metric spec file");
    std::string show_name;
    cat_show->add_option("name", show_name, "catalog metric name")->required();
    cat_show->add_option("--param", params, "override a metric parameter, NAME=VALUE")->take_all();

    try {
        app.parse(argc, argv);

        const Format fmt = parse_format(format_s);
        std::optional<Vec3> single;
        if (!point_s.empty())
            single = parse_point(point_s);
        if (mu_opt->count() > 0)
            mu_override = mu_value;

        if (report->parsed()) {
            const Geometry g = resolve_geometry(catalog_name, metric_path, params, field);
            return run_report(g, sample_points(g.chart, samples, seed, single), fmt, eps_sig);
        }
        if (verify->parsed()) {
            const Geometry g = resolve_geometry(catalog_name, metric_path, params, field);
            return run_verify(g, sample_points(g.chart, samples, seed, single), fmt, tol, h_rel,
                              scenario_id);
        }
        if (classify->parsed()) {
            const Geometry g = resolve_geometry(catalog_name, metric_path, params, "");
            return run_classify(g, sample_points(g.chart, samples, seed, single), fmt, eps_sig);
        }
        if (flow->parsed()) {
            if (!ode_id.empty())
                return run_ode(ode_id, fmt, dt);
            const Geometry g = resolve_geometry(catalog_name, metric_path, params, field);
            if (!single)
                throw CLI::ValidationError("--point", "flow needs a start point (or --ode)");
            return run_flow(g, *single, fmt, dt, s_max, mu_override);
        }
        if (cat_list->parsed())
            return run_catalog_list(fmt);
        if (cat_show->parsed())
            return run_catalog_show(show_name, params);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ChartError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ChartDomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const EvalDomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const JetDomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const LinalgDomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
