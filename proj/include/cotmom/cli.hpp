#ifndef COTMOM_CLI_HPP
#define COTMOM_CLI_HPP

// Command-line front end.  Every run echoes its full configuration into the
// output header (or a .meta sidecar for file-bound CSV), and identical
// config plus cache state must reproduce identical bytes.
//
// Exit codes: 0 success, 2 usage, 3 unreadable/corrupt data, 4 probe or
// oracle-agreement failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cf.hpp"
#include "common.hpp"
#include "moments.hpp"
#include "signconv.hpp"

namespace cotmom::cli {

inline constexpr const char* kVersion = "1.0.0";

struct RunConfig {
    std::string command;
    unsigned threads = 0;
    double tol = 1e-6;
    std::string format = "csv";
    std::string cache_dir;
    std::uint64_t seed = 0;
    std::string out;

    std::string echo() const {
        std::string s;
        s += "# cotmom " + command + " v" + kVersion + "\n";
        s += "# threads=" + std::to_string(threads ? threads : default_threads()) + "\n";
        s += "# tol=" + fp_str(tol) + "\n";
        s += "# format=" + format + "\n";
        s += "# cache_dir=" + (cache_dir.empty() ? std::string("(none)") : cache_dir) + "\n";
        s += "# seed=" + std::to_string(seed) + "\n";
        return s;
    }
    std::string echo_json() const {
        std::string s = "{\"command\":\"" + command + "\",\"version\":\"" + kVersion +
                        "\",\"threads\":" + std::to_string(threads ? threads : default_threads()) +
                        ",\"tol\":" + fp_str(tol) + ",\"format\":\"" + format +
                        "\",\"cache_dir\":\"" + cache_dir +
                        "\",\"seed\":" + std::to_string(seed) + "}";
        return s;
    }
};

namespace detail {

struct Sink {
    std::ostream* os;
    std::unique_ptr<std::ofstream> file;

    explicit Sink(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            os = &fallback;
        } else {
            file = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
            if (!*file) throw data_error("cannot open output file: " + path);
            os = file.get();
        }
    }
    std::ostream& get() { return *os; }
};

inline std::string json_pairs_end() { return "}\n"; }

} // namespace detail

// ------------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out_stream,
               std::ostream& err_stream) {
    RunConfig cfg;

    CLI::App app{"cotangent-sum moments toolkit"};
    app.require_subcommand(1);
    app.add_option("--threads", cfg.threads, "worker threads (0 = hardware)");
    app.add_option("--tol", cfg.tol, "accuracy target where applicable");
    app.add_option("--format", cfg.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--cache-dir", cfg.cache_dir, "cache directory (default $COTMOM_CACHE_DIR)");
    app.add_option("--seed", cfg.seed, "node-shift seed for quadrature offsets");
    app.add_option("--out", cfg.out, "write the report here instead of stdout");

    // cf
    std::string cf_x;
    auto* sub_cf = app.add_subcommand("cf", "continued fraction expansion and convergents");
    sub_cf->add_option("--x", cf_x, "rational a/b in (0,1)")->required();

    // c0 / vasyunin
    std::uint64_t arg_r = 0, arg_b = 0;
    std::string vas_variant = "standard";
    auto* sub_c0 = app.add_subcommand("c0", "cotangent sum c0(r/b)");
    sub_c0->add_option("--r", arg_r)->required();
    sub_c0->add_option("--b", arg_b)->required();
    auto* sub_vas = app.add_subcommand("vasyunin", "Vasyunin sum V(r/b)");
    sub_vas->add_option("--r", arg_r)->required();
    sub_vas->add_option("--b", arg_b)->required();
    sub_vas->add_option("--variant", vas_variant)->check(CLI::IsMember({"standard", "paper"}));

    // g
    std::string g_x, g_method = "auto";
    std::uint64_t g_len = 1'000'000;
    int g_n = kWiltonDepthDefault;
    auto* sub_g = app.add_subcommand("g", "evaluate g(x)");
    sub_g->add_option("--x", g_x, "point in (0,1); a/b is exact")->required();
    sub_g->add_option("--method", g_method)
        ->check(CLI::IsMember({"auto", "series", "wilton", "dsin", "c0-identity"}));
    sub_g->add_option("--len", g_len, "series/dsin length");
    sub_g->add_option("--n", g_n, "wilton truncation");

    // dsin
    std::string ds_x, ds_avg = "cesaro2";
    std::uint64_t ds_N = 1'000'000;
    auto* sub_ds = app.add_subcommand("dsin", "divisor sine series partial sum");
    sub_ds->add_option("--x", ds_x)->required();
    sub_ds->add_option("--N", ds_N);
    sub_ds->add_option("--averaging", ds_avg)
        ->check(CLI::IsMember({"none", "cesaro1", "cesaro2"}));

    // moment
    std::uint64_t mo_q = 0;
    int mo_k = 1;
    auto* sub_mo = app.add_subcommand("moment", "empirical moment of c0(a/q)^(2k)");
    sub_mo->add_option("--q", mo_q)->required();
    sub_mo->add_option("--k", mo_k);

    // h1
    auto* sub_h1 = app.add_subcommand("h1", "two-oracle reference for the limit of M(q)/q^2");
    std::uint64_t h1_qmax = 20011;
    sub_h1->add_option("--qmax", h1_qmax, "top of the extrapolation ladder");

    // error-scan
    std::uint64_t sc_lo = 0, sc_hi = 0;
    auto* sub_scan = app.add_subcommand("error-scan", "second-moment error term over a prime range");
    sub_scan->add_option("--primes", [&sc_lo, &sc_hi](const std::vector<std::string>& v) {
        if (v.size() != 2) return false;
        sc_lo = std::stoull(v[0]);
        sc_hi = std::stoull(v[1]);
        return true;
    }, "LO HI")->expected(2)->required();

    // sigma
    std::uint64_t sg_q = 0;
    int sg_K = -1;
    auto* sub_sg = app.add_subcommand("sigma", "Sigma decomposition report");
    sub_sg->add_option("--q", sg_q)->required();
    sub_sg->add_option("--K", sg_K, "depth cutoff (default ceil(2 log q))");

    // sign-probe
    std::vector<std::uint64_t> sp_qs = {5, 7, 11};
    std::uint64_t sp_bmax = 200;
    auto* sub_sp = app.add_subcommand("sign-probe", "fit the sign/constant conventions");
    sub_sp->add_option("--q-list", sp_qs, "primes <= 1000");
    sub_sp->add_option("--b-max", sp_bmax);

    // growth
    int gr_kmax = 8;
    auto* sub_gr = app.add_subcommand("growth", "growth of int |g|^K against (e^gamma/pi) K!");
    sub_gr->add_option("--kmax", gr_kmax);

    // bench
    std::uint64_t be_q = 10007;
    auto* sub_be = app.add_subcommand("bench", "table-build throughput");
    sub_be->add_option("--q", be_q);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out_stream << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err_stream << "usage error: " << e.what() << "\n";
        return 2;
    }
    if (cfg.cache_dir.empty()) {
        const char* env = std::getenv("COTMOM_CACHE_DIR");
        if (env && *env) cfg.cache_dir = env;
    }
    const unsigned threads = cfg.threads ? cfg.threads : default_threads();
    const bool json = cfg.format == "json";

    try {
        detail::Sink sink(cfg.out, out_stream);
        std::ostream& os = sink.get();

        if (*sub_cf) {
            cfg.command = "cf";
            BigRat x = parse_rational(cf_x);
            CFExpansion cf = cf_expand(x);
            ConvergentSeq cs = convergents(cf);
            if (json) {
                os << "{\"config\":" << cfg.echo_json() << ",\"cf\":\"" << cf_to_string(cf)
                   << "\",\"quotients\":[";
                for (std::size_t i = 0; i < cf.quotients.size(); ++i)
                    os << (i ? "," : "") << cf.quotients[i].str();
                os << "],\"convergents\":[";
                for (int k = 0; k <= cs.last(); ++k)
                    os << (k ? "," : "") << "\"" << cs.p[std::size_t(k)].str() << "/"
                       << cs.q[std::size_t(k)].str() << "\"";
                os << "]}\n";
            } else {
                os << cfg.echo();
                os << "# " << cf_to_string(cf) << "\n";
                os << "k,a_k,p_k,q_k\n";
                os << "0,," << cs.p[0].str() << "," << cs.q[0].str() << "\n";
                for (std::size_t k = 1; k < cs.p.size(); ++k)
                    os << k << "," << cf.quotients[k - 1].str() << "," << cs.p[k].str() << ","
                       << cs.q[k].str() << "\n";
            }
            return 0;
        }

        if (*sub_c0) {
            cfg.command = "c0";
            double v = c0(arg_r, arg_b);
            if (json)
                os << "{\"config\":" << cfg.echo_json() << ",\"r\":" << arg_r
                   << ",\"b\":" << arg_b << ",\"c0\":" << fp_str(v) << "}\n";
            else
                os << cfg.echo() << "r,b,c0\n"
                   << arg_r << "," << arg_b << "," << fp_str(v) << "\n";
            return 0;
        }

        if (*sub_vas) {
            cfg.command = "vasyunin";
            auto var = vas_variant == "paper" ? VasyuninVariant::paper : VasyuninVariant::standard;
            double v = vasyunin(arg_r, arg_b, var);
            if (json)
                os << "{\"config\":" << cfg.echo_json() << ",\"r\":" << arg_r
                   << ",\"b\":" << arg_b << ",\"variant\":\"" << vas_variant
                   << "\",\"value\":" << fp_str(v) << "}\n";
            else
                os << cfg.echo() << "r,b,variant,value\n"
                   << arg_r << "," << arg_b << "," << vas_variant << "," << fp_str(v) << "\n";
            return 0;
        }

        if (*sub_g) {
            cfg.command = "g";
            GEvalOptions go;
            go.series_len = g_len;
            go.dsin_len = g_len;
            go.wilton_n = g_n;
            GMethod m = GMethod::automatic;
            if (g_method == "series") m = GMethod::series;
            else if (g_method == "wilton") m = GMethod::wilton;
            else if (g_method == "dsin") m = GMethod::dsin;
            else if (g_method == "c0-identity") m = GMethod::c0_identity;
            GValue gv;
            if (g_x.find('/') != std::string::npos) {
                gv = g_eval(parse_rational(g_x), m, cfg.tol, go);
            } else {
                gv = g_eval(std::stod(g_x), m, cfg.tol, go);
            }
            if (json)
                os << "{\"config\":" << cfg.echo_json() << ",\"x\":\"" << g_x
                   << "\",\"method\":\"" << g_method_name(gv.method)
                   << "\",\"value\":" << fp_str(gv.value) << ",\"err_bound\":"
                   << fp_str(gv.err_bound) << ",\"detail\":\"" << gv.detail << "\"}\n";
            else
                os << cfg.echo() << "x,method,value,err_bound,detail\n"
                   << g_x << "," << g_method_name(gv.method) << "," << fp_str(gv.value) << ","
                   << fp_str(gv.err_bound) << "," << gv.detail << "\n";
            return 0;
        }

        if (*sub_ds) {
            cfg.command = "dsin";
            Averaging avg = ds_avg == "none"      ? Averaging::none
                            : ds_avg == "cesaro1" ? Averaging::cesaro1
                                                  : Averaging::cesaro2;
            double v;
            if (ds_x.find('/') != std::string::npos) {
                BigRat x = parse_rational(ds_x);
                v = d_sin_rational(
                    static_cast<std::uint64_t>(boost::multiprecision::numerator(x)),
                    static_cast<std::uint64_t>(boost::multiprecision::denominator(x)), ds_N, avg);
            } else {
                v = d_sin(std::stod(ds_x), ds_N, avg);
            }
            if (json)
                os << "{\"config\":" << cfg.echo_json() << ",\"x\":\"" << ds_x
                   << "\",\"N\":" << ds_N << ",\"averaging\":\"" << ds_avg
                   << "\",\"value\":" << fp_str(v) << "}\n";
            else
                os << cfg.echo() << "x,N,averaging,value\n"
                   << ds_x << "," << ds_N << "," << ds_avg << "," << fp_str(v) << "\n";
            return 0;
        }

        if (*sub_mo) {
            cfg.command = "moment";
            MomentReport m = empirical_moment(mo_q, mo_k, threads, cfg.cache_dir);
            char cs[24];
            std::snprintf(cs, sizeof(cs), "%016llx",
                          static_cast<unsigned long long>(m.provenance_checksum));
            if (json)
                os << "{\"config\":" << cfg.echo_json() << ",\"q\":" << m.q << ",\"k\":" << m.k
                   << ",\"M\":" << fp_str(m.M) << ",\"M_normalized\":" << fp_str(m.M_normalized)
                   << ",\"checksum\":\"" << cs << "\"}\n";
            else
                os << cfg.echo() << "q,k,M,M_normalized,checksum\n"
                   << m.q << "," << m.k << "," << fp_str(m.M) << "," << fp_str(m.M_normalized)
                   << "," << cs << "\n";
            return 0;
        }

        if (*sub_h1) {
            cfg.command = "h1";
            H1Options ho;
            ho.threads = threads;
            ho.cache_dir = cfg.cache_dir;
            std::erase_if(ho.ladder, [&](std::uint64_t q) { return q > h1_qmax; });
            if (ho.ladder.size() < 4)
                throw domain_error("h1: ladder too short; raise --qmax");
            H1Reference h1 = h1_reference(std::max(cfg.tol, 1e-5), ho);
            if (json)
                os << "{\"config\":" << cfg.echo_json() << ",\"h1_quad\":" << fp_str(h1.h1_quad)
                   << ",\"h1_quad_err\":" << fp_str(h1.h1_quad_err)
                   << ",\"h1_extrap\":" << fp_str(h1.h1_extrap)
                   << ",\"h1_extrap_err\":" << fp_str(h1.h1_extrap_err)
                   << ",\"agreed\":" << (h1.agreed ? "true" : "false")
                   << ",\"refine_diff\":" << fp_str(h1.refine_diff)
                   << ",\"kappa\":" << fp_str(h1.kappa) << "}\n";
            else
                os << cfg.echo()
                   << "h1_quad,h1_quad_err,h1_extrap,h1_extrap_err,agreed,refine_diff,kappa\n"
                   << fp_str(h1.h1_quad) << "," << fp_str(h1.h1_quad_err) << ","
                   << fp_str(h1.h1_extrap) << "," << fp_str(h1.h1_extrap_err) << ","
                   << (h1.agreed ? 1 : 0) << "," << fp_str(h1.refine_diff) << ","
                   << fp_str(h1.kappa) << "\n";
            if (!h1.agreed) throw probe_error("h1: oracle disagreement");
            return 0;
        }

        if (*sub_scan) {
            cfg.command = "error-scan";
            if (sc_lo >= sc_hi) throw domain_error("error-scan: need LO < HI");
            H1Options ho;
            ho.threads = threads;
            ho.cache_dir = cfg.cache_dir;
            std::erase_if(ho.ladder, [&](std::uint64_t q) { return q > std::max(sc_hi, std::uint64_t(2100)); });
            H1Reference h1 = h1_reference(1e-5, ho);
            auto rows = error_scan(sc_lo, sc_hi, h1, threads, cfg.cache_dir);
            if (rows.size() < 10) throw domain_error("error-scan: range holds fewer than 10 primes");
            FitResult fit = scan_fit(rows);
            if (json) {
                os << "{\"config\":" << cfg.echo_json() << ",\"rows\":[";
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    const auto& r = rows[i];
                    char cs[24];
                    std::snprintf(cs, sizeof(cs), "%016llx",
                                  static_cast<unsigned long long>(r.checksum));
                    os << (i ? "," : "") << "{\"q\":" << r.q << ",\"M2\":" << fp_str(r.M2)
                       << ",\"M4\":" << fp_str(r.M4) << ",\"E\":" << fp_str(r.E)
                       << ",\"E_tilde\":" << fp_str(r.E_tilde)
                       << ",\"E_norm\":" << fp_str(r.E_norm) << ",\"h1_used\":"
                       << fp_str(r.h1_used) << ",\"kappa_used\":" << fp_str(r.kappa_used)
                       << ",\"checksum\":\"" << cs << "\"}";
                }
                os << "],\"fit\":{\"exponent\":" << fp_str(fit.exponent)
                   << ",\"constant\":" << fp_str(fit.constant)
                   << ",\"min_E_norm\":" << fp_str(fit.min_E_norm)
                   << ",\"min_abs_E_norm\":" << fp_str(fit.min_abs_E_norm)
                   << ",\"n_positive\":" << fit.n_positive
                   << ",\"n_negative\":" << fit.n_negative
                   << ",\"sign_threshold_q\":" << fit.sign_threshold_q << "}}\n";
            } else {
                // pure CSV body (byte-reproducible); config echo to sidecar or stderr
                if (!cfg.out.empty()) {
                    try {
                        atomic_write_file(cfg.out + ".meta",
                                          cfg.echo() + "# fit_exponent=" + fp_str(fit.exponent) +
                                              "\n# fit_constant=" + fp_str(fit.constant) + "\n");
                    } catch (const std::exception&) {
                    }
                } else {
                    err_stream << cfg.echo();
                }
                os << kScanCsvHeader << "\n";
                for (const auto& r : rows) os << scan_row_csv(r) << "\n";
            }
            return 0;
        }

        if (*sub_sg) {
            cfg.command = "sigma";
            if (sg_K < 0) sg_K = int(std::ceil(2.0 * std::log(double(sg_q))));
            SigmaParams sp;
            sp.threads = threads;
            SigmaReport rep = sigma_terms(sg_q, sg_K, sp);
            // JSON is the primary mirror for this report
            std::ostringstream j;
            j << "{\"q\":" << rep.q << ",\"K\":" << rep.K
              << ",\"sigma1\":" << fp_str(rep.sigma1) << ",\"sigma2\":" << fp_str(rep.sigma2)
              << ",\"sigma3\":" << fp_str(rep.sigma3) << ",\"sigma4\":" << fp_str(rep.sigma4)
              << ",\"class_counts\":[";
            for (std::size_t k = 0; k < rep.class_counts.size(); ++k)
                j << (k ? "," : "") << "[" << rep.class_counts[k].first << ","
                  << rep.class_counts[k].second << "]";
            j << "],\"tol\":" << fp_str(rep.tol) << "}";
            if (json) {
                os << "{\"config\":" << cfg.echo_json() << ",\"report\":" << j.str() << "}\n";
            } else {
                os << cfg.echo() << "q,K,sigma1,sigma2,sigma3,sigma4,tol\n"
                   << rep.q << "," << rep.K << "," << fp_str(rep.sigma1) << ","
                   << fp_str(rep.sigma2) << "," << fp_str(rep.sigma3) << ","
                   << fp_str(rep.sigma4) << "," << fp_str(rep.tol) << "\n";
                os << "k,class1,class2\n";
                for (std::size_t k = 0; k < rep.class_counts.size(); ++k)
                    os << (k + 1) << "," << rep.class_counts[k].first << ","
                       << rep.class_counts[k].second << "\n";
            }
            return 0;
        }

        if (*sub_sp) {
            cfg.command = "sign-probe";
            SignProbeOptions po;
            po.vas_bmax = sp_bmax;
            po.threads = threads;
            SignConvention sc = sign_probe(sp_qs, po);
            if (json) {
                os << "{\"config\":" << cfg.echo_json() << ",\"s_dsin\":" << sc.s_dsin
                   << ",\"kappa\":" << fp_str(sc.kappa) << ",\"kappa_exact\":"
                   << fp_str(sc.kappa_exact) << ",\"kappa_name\":\"" << sc.kappa_name
                   << "\",\"paper_constant_matches\":"
                   << (sc.paper_constant_matches ? "true" : "false")
                   << ",\"s_vas\":" << sc.s_vas << ",\"max_vas_resid\":"
                   << fp_str(sc.max_vas_resid) << ",\"max_rel_resid\":"
                   << fp_str(sc.max_rel_resid) << ",\"kappa_spread\":"
                   << fp_str(sc.kappa_spread) << "}\n";
            } else {
                os << cfg.echo()
                   << "s_dsin,kappa,kappa_exact,kappa_name,paper_constant_matches,s_vas,"
                      "max_vas_resid,max_rel_resid,kappa_spread\n"
                   << sc.s_dsin << "," << fp_str(sc.kappa) << "," << fp_str(sc.kappa_exact)
                   << "," << sc.kappa_name << "," << (sc.paper_constant_matches ? 1 : 0) << ","
                   << sc.s_vas << "," << fp_str(sc.max_vas_resid) << ","
                   << fp_str(sc.max_rel_resid) << "," << fp_str(sc.kappa_spread) << "\n";
                os << "q,kappa_q\n";
                for (auto& [q, k] : sc.kappa_by_q) os << q << "," << fp_str(k) << "\n";
            }
            return 0;
        }

        if (*sub_gr) {
            cfg.command = "growth";
            GPowParams gp;
            gp.threads = threads;
            MomentGrowth mg = moment_growth(gr_kmax, gp);
            if (json) {
                os << "{\"config\":" << cfg.echo_json() << ",\"rows\":[";
                for (std::size_t i = 0; i < mg.K.size(); ++i)
                    os << (i ? "," : "") << "{\"K\":" << mg.K[i] << ",\"integral\":"
                       << fp_str(mg.integral[i]) << ",\"ratio\":" << fp_str(mg.ratio[i]) << "}";
                os << "]}\n";
            } else {
                os << cfg.echo() << "K,integral,ratio\n";
                for (std::size_t i = 0; i < mg.K.size(); ++i)
                    os << mg.K[i] << "," << fp_str(mg.integral[i]) << "," << fp_str(mg.ratio[i])
                       << "\n";
            }
            return 0;
        }

        if (*sub_be) {
            cfg.command = "bench";
            os << cfg.echo();
            os << "threads,seconds,checksum\n";
            for (unsigned t : {1u, 2u, 4u, 8u}) {
                auto t0 = std::chrono::steady_clock::now();
                C0Table tab = c0_table(be_q, t);
                double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count();
                char cs[24];
                std::snprintf(cs, sizeof(cs), "%016llx",
                              static_cast<unsigned long long>(tab.checksum));
                os << t << "," << fp_str(dt) << "," << cs << "\n";
                if (t >= default_threads() * 2) break;
            }
            return 0;
        }
    } catch (const probe_error& e) {
        err_stream << "probe failure: " << e.what() << "\n";
        return 4;
    } catch (const data_error& e) {
        err_stream << "data error: " << e.what() << "\n";
        return 3;
    } catch (const domain_error& e) {
        err_stream << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err_stream << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

inline int run_argv(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, out, err);
}

} // namespace cotmom::cli

#endif
