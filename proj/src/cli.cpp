#include "bayesdetect/cli.hpp"

#include "bayesdetect/detectors.hpp"
#include "bayesdetect/errors.hpp"
#include "bayesdetect/io.hpp"
#include "bayesdetect/montecarlo.hpp"
#include "bayesdetect/roc.hpp"
#include "bayesdetect/special.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#ifndef BAYESDETECT_VERSION
#define BAYESDETECT_VERSION "dev"
#endif

namespace bayesdetect::cli {

namespace {

using json = nlohmann::ordered_json;

struct RunConfig {
    std::optional<int> n;
    std::optional<int> l;
    std::optional<int> m;
    std::optional<int> m_max;
    std::optional<int> true_m;
    std::optional<double> sigma2;
    std::optional<std::string> sigma2_range;
    std::string grid_scale = "linear";
    std::optional<double> snr_db;
    std::uint64_t seed = 1;
    long trials = 1000;
    std::string input;
    std::string output;
    std::string format;
    int threads = 1;
    std::string precision = "standard";
    std::string detector = "bayes";
    std::optional<double> threshold;
    std::optional<double> threshold_db;

    // table
    std::string kind = "all";
    int k_min = -12;
    int k_max = 6;
    std::vector<double> xs{0.1, 0.5, 1.0, 2.0, 5.0};
    std::vector<double> ys{0.1, 1.0, 10.0, 100.0};
    int lemma_n_max = 6;
    int lemma_draws = 100;

    // count
    std::string mode = "with-noise";

    // synth
    std::string hypothesis = "h1";
    long trial = 0;
    bool eigs = false;
};

Precision parse_precision(const std::string& s) {
    return s == "extended" ? Precision::extended : Precision::standard;
}

std::optional<NoisePrior> noise_prior_from(const RunConfig& c) {
    if (c.sigma2) return ExactNoise{*c.sigma2};
    if (c.sigma2_range) {
        std::istringstream in(*c.sigma2_range);
        std::string lo, hi, k;
        if (!std::getline(in, lo, ':') || !std::getline(in, hi, ':') || !std::getline(in, k, ':')) {
            throw InputError("--sigma2-range expects lo:hi:K");
        }
        double lo_v = 0, hi_v = 0;
        int k_v = 0;
        try {
            lo_v = std::stod(lo);
            hi_v = std::stod(hi);
            k_v = std::stoi(k);
        } catch (const std::exception&) {
            throw InputError("--sigma2-range expects numeric lo:hi:K");
        }
        if (c.grid_scale == "db") return NoiseGrid::decibel(lo_v, hi_v, k_v);
        return NoiseGrid::uniform(lo_v, hi_v, k_v);
    }
    return std::nullopt;
}

json noise_json(const NoisePrior& p, const RunConfig& c) {
    if (const auto* e = std::get_if<ExactNoise>(&p)) return json{{"kind", "exact"}, {"sigma2", e->sigma2}};
    const auto& g = std::get<NoiseGrid>(p);
    return json{{"kind", "grid"},
                {"range", c.sigma2_range.value_or("")},
                {"scale", c.grid_scale},
                {"sigma2", g.sigma2},
                {"weights", g.weights}};
}

json sources_json(const SourcePrior& s) {
    if (const auto* e = std::get_if<ExactSources>(&s)) return json{{"kind", "exact"}, {"m", e->m}};
    return json{{"kind", "bounded"}, {"m_max", std::get<BoundedSources>(s).m_max}};
}

json cancellation_json(const CancellationReport& r) {
    return json{{"peak_term_log", r.peak_term_log},
                {"result_log", r.result_log},
                {"cancellation_digits", r.cancellation_digits}};
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path + "'");
    f << text;
}

/// Main output to --output (or `out` when absent); CSV files get a JSON sidecar.
void emit(const RunConfig& c, std::ostream& out, const std::string& body, const json& sidecar) {
    if (c.output.empty()) {
        out << body;
        return;
    }
    write_text_file(c.output, body);
    if (c.format == "csv") write_text_file(c.output + ".json", sidecar.dump(2) + "\n");
}

json base_config(const std::string& command, const RunConfig& c) {
    return json{{"tool", "bayesdetect"}, {"version", tool_version()}, {"command", command},
                {"precision", c.precision}};
}

// ---------------------------------------------------------------------------

int cmd_detect(const RunConfig& c, std::ostream& out) {
    if (c.input.empty()) throw InputError("detect needs --input");
    const auto obs = io::read_observation_file(c.input);
    const auto x = io::to_spectrum(obs);

    NoisePrior noise;
    if (auto p = noise_prior_from(c)) {
        noise = *p;
    } else if (c.snr_db) {
        noise = ExactNoise{sigma2_from_snr_db(*c.snr_db)};
    } else {
        throw InputError("detect needs one of --sigma2, --sigma2-range, --snr-db");
    }

    json report = base_config("detect", c);
    report["input"] = c.input;
    report["n_sensors"] = x.n_sensors();
    report["n_snapshots"] = x.n_snapshots;

    DetectionStatistic stat;
    if (c.detector == "energy") {
        const auto* e = std::get_if<ExactNoise>(&noise);
        if (!e) throw InputError("the energy detector needs an exact noise power");
        stat = energy_statistic(x, e->sigma2);
        report["prior"] = json{{"noise", noise_json(noise, c)}};
    } else {
        PriorConfig prior;
        prior.noise = noise;
        if (c.m_max) {
            prior.sources = BoundedSources{*c.m_max};
        } else {
            prior.sources = ExactSources{c.m.value_or(1)};
        }
        stat = detection_log_ratio(x, prior, parse_precision(c.precision));
        report["prior"] = json{{"sources", sources_json(prior.sources)}, {"noise", noise_json(noise, c)}};
    }

    double threshold_log10 = 0.0;
    if (c.threshold_db) {
        threshold_log10 = *c.threshold_db / 10.0;
    } else if (c.threshold) {
        if (!(*c.threshold > 0.0)) throw InputError("--threshold must be > 0");
        threshold_log10 = std::log10(*c.threshold);
    }
    const double log10_c = stat.log10_value();
    const bool signal = log10_c > threshold_log10;

    report["detector"] = to_string(stat.detector_id);
    report["log10_statistic"] = log10_c;
    report["statistic_db"] = 10.0 * log10_c;
    report["threshold_log10"] = threshold_log10;
    report["decision"] = signal ? "signal" : "noise";
    report["cancellation"] = cancellation_json(stat.cancellation);
    report["perturbed"] = stat.perturbed;
    report["used_extended"] = stat.used_extended;

    std::string body;
    if (c.format == "csv") {
        std::ostringstream csv;
        csv << "key,value\n";
        csv << "detector," << report["detector"].get<std::string>() << "\n";
        csv << "log10_statistic," << io::format_double(log10_c) << "\n";
        csv << "threshold_log10," << io::format_double(threshold_log10) << "\n";
        csv << "decision," << (signal ? "signal" : "noise") << "\n";
        csv << "cancellation_digits," << io::format_double(stat.cancellation.cancellation_digits) << "\n";
        csv << "perturbed," << (stat.perturbed ? 1 : 0) << "\n";
        csv << "used_extended," << (stat.used_extended ? 1 : 0) << "\n";
        body = csv.str();
    } else {
        body = report.dump(2) + "\n";
    }
    emit(c, out, body, report);
    if (!c.output.empty()) out << "log10 C = " << log10_c << " -> " << (signal ? "signal" : "noise") << "\n";
    return kSuccess;
}

int cmd_roc(const RunConfig& c, std::ostream& out) {
    const auto started = std::chrono::steady_clock::now();
    Scenario s;
    s.n_sensors = c.n.value_or(4);
    s.n_snapshots = c.l.value_or(8);
    s.n_sources = c.true_m.value_or(c.m.value_or(1));
    s.snr_db = c.snr_db.value_or(-3.0);
    s.n_trials = c.trials;
    s.seed = c.seed;
    s.validate();

    DetectorSpec spec;
    NoisePrior noise = noise_prior_from(c).value_or(NoisePrior{ExactNoise{s.sigma2()}});
    json detector_json;
    double threshold_scale = 1.0 / std::log(10.0);
    if (c.detector == "energy") {
        const auto* e = std::get_if<ExactNoise>(&noise);
        if (!e) throw InputError("the energy detector needs an exact noise power");
        spec = EnergyDetectorSpec{e->sigma2};
        detector_json = json{{"kind", "energy"}, {"sigma2", e->sigma2}, {"threshold_scale", "log10"}};
    } else {
        PriorConfig prior;
        prior.noise = noise;
        prior.sources = c.m_max ? SourcePrior{BoundedSources{*c.m_max}}
                                : SourcePrior{ExactSources{c.m.value_or(s.n_sources)}};
        prior.validate(s.n_sensors);
        spec = BayesDetectorSpec{prior, parse_precision(c.precision)};
        detector_json = json{{"kind", "bayes"},
                             {"sources", sources_json(prior.sources)},
                             {"noise", noise_json(noise, c)},
                             {"threshold_scale", "log10"}};
    }

    RocOptions options;
    options.threads = c.threads;
    const auto run = run_roc(s, spec, options);

    std::ostringstream csv;
    io::write_roc_csv(csv, run.curve, threshold_scale);

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json sidecar = base_config("roc", c);
    sidecar["scenario"] = json{{"n_sensors", s.n_sensors}, {"n_snapshots", s.n_snapshots},
                               {"n_sources", s.n_sources}, {"snr_db", s.snr_db},
                               {"sigma2", s.sigma2()}, {"n_trials", s.n_trials}, {"seed", s.seed}};
    sidecar["detector"] = detector_json;
    sidecar["trials_used"] = json{{"h0", run.curve.n_h0}, {"h1", run.curve.n_h1}};
    sidecar["trials_failed"] = json{{"h0", run.curve.failed_h0}, {"h1", run.curve.failed_h1}};
    sidecar["extended_evaluations"] = run.extended_evaluations;
    sidecar["perturbed_evaluations"] = run.perturbed_evaluations;
    json readings = json::array();
    for (double far : {1e-3, 1e-2, 1e-1}) {
        readings.push_back(json{{"far", far}, {"cdr", roc_metrics(run.curve, far).cdr}});
    }
    sidecar["operating_points"] = readings;
    sidecar["threads"] = c.threads;
    sidecar["runtime_seconds"] = seconds;

    RunConfig csv_config = c;
    csv_config.format = "csv";
    emit(csv_config, out, csv.str(), sidecar);
    if (!c.output.empty()) {
        out << describe(spec) << ": " << run.curve.points.size() << " operating points";
        for (const auto& r : readings) out << ", CDR@" << r["far"].get<double>() << "=" << r["cdr"].get<double>();
        out << "\n";
    }
    return kSuccess;
}

int cmd_table(const RunConfig& c, std::ostream& out) {
    if (c.k_min > c.k_max) throw InputError("--k-min must not exceed --k-max");
    const bool want_j = c.kind == "j" || c.kind == "all";
    const bool want_lemma = c.kind == "lemma" || c.kind == "all";

    json doc = base_config("table", c);
    std::ostringstream csv;
    if (want_j) {
        json rows = json::array();
        csv << "k,x,y,j_quadrature,j_bessel,rel_deviation\n";
        for (int k = c.k_min; k <= c.k_max; ++k) {
            for (double x : c.xs) {
                for (double y : c.ys) {
                    const double quad = j_integral(k, x, y, parse_precision(c.precision)).value();
                    std::optional<double> bessel;
                    if (y > 0.0) bessel = j_via_bessel(k, x, y);
                    const double dev = bessel ? std::abs(quad - *bessel) / *bessel : std::nan("");
                    csv << k << ',' << io::format_double(x) << ',' << io::format_double(y) << ','
                        << io::format_double(quad) << ','
                        << (bessel ? io::format_double(*bessel) : std::string("")) << ','
                        << (bessel ? io::format_double(dev) : std::string("")) << '\n';
                    rows.push_back(json{{"k", k}, {"x", x}, {"y", y}, {"j_quadrature", quad},
                                        {"j_bessel", bessel ? json(*bessel) : json(nullptr)},
                                        {"rel_deviation", bessel ? json(dev) : json(nullptr)}});
                }
            }
        }
        doc["j_grid"] = json{{"k_min", c.k_min}, {"k_max", c.k_max}, {"x", c.xs}, {"y", c.ys}};
        doc["j"] = rows;
    }
    if (want_lemma) {
        if (want_j) csv << '\n';
        csv << "n,draw,b,det_numeric,det_closed_form,rel_residual\n";
        json rows = json::array();
        StreamRng rng(c.seed, 0x6c656d6d61ULL, 0, 0);
        std::uniform_real_distribution<double> a_dist(0.0, 5.0);
        std::uniform_real_distribution<double> b_dist(0.5, 2.0);
        for (int n = 2; n <= c.lemma_n_max; ++n) {
            for (int d = 0; d < c.lemma_draws; ++d) {
                std::vector<double> a(static_cast<std::size_t>(n));
                double gap = 0.0;
                do {
                    for (auto& v : a) v = a_dist(rng);
                    auto sorted = a;
                    std::sort(sorted.begin(), sorted.end());
                    gap = std::numeric_limits<double>::infinity();
                    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) gap = std::min(gap, sorted[i + 1] - sorted[i]);
                } while (gap < 0.05);
                const double b = b_dist(rng);
                const double num = lemma1_determinant(a, b);
                const double closed = lemma1_closed_form(a, b);
                const double res = std::abs(num - closed) / std::abs(closed);
                csv << n << ',' << d << ',' << io::format_double(b) << ',' << io::format_double(num) << ','
                    << io::format_double(closed) << ',' << io::format_double(res) << '\n';
                rows.push_back(json{{"n", n}, {"draw", d}, {"a", a}, {"b", b}, {"det_numeric", num},
                                    {"det_closed_form", closed}, {"rel_residual", res}});
            }
        }
        doc["lemma_config"] = json{{"n_max", c.lemma_n_max}, {"draws", c.lemma_draws}, {"seed", c.seed}};
        doc["lemma"] = rows;
    }
    const std::string body = c.format == "json" ? doc.dump(2) + "\n" : csv.str();
    json sidecar = doc;
    sidecar.erase("j");
    sidecar.erase("lemma");
    emit(c, out, body, sidecar);
    return kSuccess;
}

int cmd_count(const RunConfig& c, std::ostream& out) {
    if (c.input.empty()) throw InputError("count needs --input");
    if (!c.m_max) throw InputError("count needs --m-max");
    const auto x = io::to_spectrum(io::read_observation_file(c.input));
    double sigma2 = 0.0;
    if (c.sigma2) {
        sigma2 = *c.sigma2;
    } else if (c.snr_db) {
        sigma2 = sigma2_from_snr_db(*c.snr_db);
    } else {
        throw InputError("count needs --sigma2 or --snr-db");
    }
    const auto mode = c.mode == "signals-only" ? CountMode::signals_only : CountMode::with_noise;
    const auto post = source_count_posteriors(x, sigma2, *c.m_max, mode, parse_precision(c.precision));

    json report = base_config("count", c);
    report["input"] = c.input;
    report["sigma2"] = sigma2;
    report["m_max"] = *c.m_max;
    report["mode"] = c.mode;
    std::vector<int> ks;
    std::vector<double> log10_ratios;
    for (std::size_t i = 0; i < post.probabilities.size(); ++i) {
        ks.push_back(post.first_k + static_cast<int>(i));
        log10_ratios.push_back(post.log_ratios[i] / std::log(10.0));
    }
    report["hypotheses"] = ks;
    report["probabilities"] = post.probabilities;
    report["log10_ratios"] = log10_ratios;
    report["argmax"] = post.argmax();

    std::string body;
    if (c.format == "csv") {
        std::ostringstream csv;
        csv << "k,probability,log10_ratio\n";
        for (std::size_t i = 0; i < ks.size(); ++i) {
            csv << ks[i] << ',' << io::format_double(post.probabilities[i]) << ','
                << io::format_double(log10_ratios[i]) << '\n';
        }
        body = csv.str();
    } else {
        body = report.dump(2) + "\n";
    }
    emit(c, out, body, report);
    if (!c.output.empty()) out << "most probable source count: " << post.argmax() << "\n";
    return kSuccess;
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
    Scenario s;
    s.n_sensors = c.n.value_or(4);
    s.n_snapshots = c.l.value_or(8);
    s.n_sources = c.m.value_or(1);
    s.snr_db = c.snr_db.value_or(0.0);
    s.n_trials = 1;
    s.seed = c.seed;
    const auto hyp = c.hypothesis == "h0" ? Hypothesis::h0 : Hypothesis::h1;
    const auto y = synthesize_observation(s, hyp, c.trial);
    std::ostringstream text;
    if (c.eigs) {
        io::write_eigenvalues(text, gram_eigenvalues(y));
    } else {
        io::write_sample_matrix(text, y);
    }
    if (c.output.empty()) {
        out << text.str();
    } else {
        write_text_file(c.output, text.str());
    }
    return kSuccess;
}

// ---------------------------------------------------------------------------

void add_noise_flags(CLI::App* sub, RunConfig& c, bool snr_is_prior) {
    auto* s2 = sub->add_option("--sigma2", c.sigma2, "Known noise power")->check(CLI::PositiveNumber);
    auto* range = sub->add_option("--sigma2-range", c.sigma2_range,
                                  "Noise power prior lo:hi:K (linear sigma2 or dB per --grid-scale)");
    s2->excludes(range);
    sub->add_option("--grid-scale", c.grid_scale, "Spacing of --sigma2-range")
        ->check(CLI::IsMember({"linear", "db"}));
    auto* snr = sub->add_option("--snr-db", c.snr_db,
                                snr_is_prior ? "Known SNR in dB (sigma2 = 10^(-SNR/10))"
                                             : "True SNR of the simulated scenario in dB");
    if (snr_is_prior) {
        snr->excludes(s2);
        snr->excludes(range);
    }
}

void add_source_flags(CLI::App* sub, RunConfig& c) {
    auto* m = sub->add_option("--m", c.m, "Known number of sources")->check(CLI::PositiveNumber);
    auto* mm = sub->add_option("--m-max", c.m_max, "Upper bound on the number of sources")
                   ->check(CLI::PositiveNumber);
    m->excludes(mm);
}

void add_common_flags(CLI::App* sub, RunConfig& c, const std::string& default_format) {
    c.format = default_format;
    sub->add_option("--output", c.output, "Output file (stdout when absent)");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--precision", c.precision, "Arithmetic for the closed forms")
        ->check(CLI::IsMember({"standard", "extended"}));
    sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", c.seed, "Random seed");
}

}  // namespace

std::string tool_version() { return BAYESDETECT_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian multi-sensor signal detection"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    RunConfig detect_cfg, roc_cfg, table_cfg, count_cfg, synth_cfg;

    auto* detect = app.add_subcommand("detect", "Decide signal vs. noise for one observation");
    add_common_flags(detect, detect_cfg, "json");
    detect->add_option("--input", detect_cfg.input, "Sample-matrix or eigenvalue file")->required();
    add_source_flags(detect, detect_cfg);
    add_noise_flags(detect, detect_cfg, true);
    detect->add_option("--detector", detect_cfg.detector)->check(CLI::IsMember({"bayes", "energy"}));
    auto* thr = detect->add_option("--threshold", detect_cfg.threshold, "Decision threshold on C (linear)");
    auto* thr_db = detect->add_option("--threshold-db", detect_cfg.threshold_db, "Threshold as 10 log10 C");
    thr->excludes(thr_db);

    auto* roc = app.add_subcommand("roc", "Monte Carlo FAR/CDR curve");
    add_common_flags(roc, roc_cfg, "csv");
    roc->add_option("--n", roc_cfg.n, "Sensors")->check(CLI::PositiveNumber);
    roc->add_option("--l", roc_cfg.l, "Snapshots")->check(CLI::PositiveNumber);
    add_source_flags(roc, roc_cfg);
    roc->add_option("--true-m", roc_cfg.true_m, "Sources in the simulation (default --m or 1)")
        ->check(CLI::PositiveNumber);
    add_noise_flags(roc, roc_cfg, false);
    roc->add_option("--trials", roc_cfg.trials, "Trials per hypothesis")->check(CLI::PositiveNumber);
    roc->add_option("--detector", roc_cfg.detector)->check(CLI::IsMember({"bayes", "energy"}));

    auto* table = app.add_subcommand("table", "Tabulate J_k and the determinant identity");
    add_common_flags(table, table_cfg, "csv");
    table->add_option("--kind", table_cfg.kind)->check(CLI::IsMember({"j", "lemma", "all"}));
    table->add_option("--k-min", table_cfg.k_min);
    table->add_option("--k-max", table_cfg.k_max);
    table->add_option("--x", table_cfg.xs, "Lower limits x")->delimiter(',');
    table->add_option("--y", table_cfg.ys, "Parameters y")->delimiter(',');
    table->add_option("--lemma-n-max", table_cfg.lemma_n_max)->check(CLI::Range(2, 12));
    table->add_option("--lemma-draws", table_cfg.lemma_draws)->check(CLI::PositiveNumber);

    auto* count = app.add_subcommand("count", "Posterior over the number of sources");
    add_common_flags(count, count_cfg, "json");
    count->add_option("--input", count_cfg.input, "Sample-matrix or eigenvalue file")->required();
    count->add_option("--m-max", count_cfg.m_max, "Largest source count considered")
        ->check(CLI::PositiveNumber)
        ->required();
    auto* c_s2 = count->add_option("--sigma2", count_cfg.sigma2)->check(CLI::PositiveNumber);
    auto* c_snr = count->add_option("--snr-db", count_cfg.snr_db);
    c_s2->excludes(c_snr);
    count->add_option("--mode", count_cfg.mode)->check(CLI::IsMember({"with-noise", "signals-only"}));

    auto* synth = app.add_subcommand("synth", "Write one simulated observation");
    synth->add_option("--output", synth_cfg.output, "Output file (stdout when absent)");
    synth->add_option("--seed", synth_cfg.seed);
    synth->add_option("--n", synth_cfg.n)->check(CLI::PositiveNumber);
    synth->add_option("--l", synth_cfg.l)->check(CLI::PositiveNumber);
    synth->add_option("--m", synth_cfg.m)->check(CLI::PositiveNumber);
    synth->add_option("--snr-db", synth_cfg.snr_db);
    synth->add_option("--hypothesis", synth_cfg.hypothesis)->check(CLI::IsMember({"h0", "h1"}));
    synth->add_option("--trial", synth_cfg.trial)->check(CLI::NonNegativeNumber);
    synth->add_flag("--eigs", synth_cfg.eigs, "Write the eigenvalue file instead of the samples");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    try {
        if (detect->parsed()) return cmd_detect(detect_cfg, out);
        if (roc->parsed()) return cmd_roc(roc_cfg, out);
        if (table->parsed()) return cmd_table(table_cfg, out);
        if (count->parsed()) return cmd_count(count_cfg, out);
        if (synth->parsed()) return cmd_synth(synth_cfg, out);
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kNumericFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
    return kUsageError;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

}  // namespace bayesdetect::cli
