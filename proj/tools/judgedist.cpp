// judgedist — estimate the judgment-accuracy distribution of judge
// ensembles: simulate labeled pools, fit the two-component Beta-Binomial
// mixture, sample adaptively with a conformal stopping rule, transfer
// priors between datasets, and evaluate per-k error margins.
//
// Exit codes: 0 success, 2 input or format error, 3 fit did not
// converge, 4 stopping criterion unmet before the stream ran out.
// Usage errors follow the CLI parser's own codes.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "judgedist/conformal.hpp"
#include "judgedist/dist.hpp"
#include "judgedist/em.hpp"
#include "judgedist/evaluate.hpp"
#include "judgedist/io.hpp"
#include "judgedist/rng.hpp"
#include "judgedist/simulate.hpp"
#include "judgedist/transfer.hpp"

using nlohmann::json;
using namespace judgedist;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitCriterionUnmet = 4;

bool g_quiet = false;

void say(const std::string& line) {
    if (!g_quiet) std::cout << line << "\n";
}

struct EmFlags {
    int max_iter = 500;
    double tol = 1e-6;
    double smoothing = 0.0;
    double floor = 1e-3;
    std::string init = "median_split";
    std::string update = "normalized";

    void attach(CLI::App* cmd) {
        cmd->add_option("--max-iter", max_iter, "EM iteration cap");
        cmd->add_option("--tol", tol, "EM convergence threshold");
        cmd->add_option("--smoothing", smoothing,
                        "boundary clamp for s/k (0 = auto 1/(2k))");
        cmd->add_option("--floor", floor, "lower bound on fitted shapes");
        cmd->add_option("--init", init, "initialization: median_split|fixed")
            ->check(CLI::IsMember({"median_split", "fixed"}));
        cmd->add_option("--update", update,
                        "component update rule: normalized|pseudo_counts")
            ->check(CLI::IsMember({"normalized", "pseudo_counts"}));
    }

    EmConfig config() const {
        EmConfig cfg;
        cfg.max_iter = max_iter;
        cfg.tol = tol;
        cfg.boundary_smoothing = smoothing;
        cfg.param_floor = floor;
        cfg.init = init == "fixed" ? EmInit::fixed : EmInit::median_split;
        cfg.update = update == "pseudo_counts" ? EmUpdate::pseudo_counts
                                               : EmUpdate::normalized;
        return cfg;
    }

    json echo() const {
        return json{{"max_iter", max_iter}, {"tol", tol},
                    {"smoothing", smoothing}, {"floor", floor},
                    {"init", init},          {"update", update}};
    }
};

struct StopFlags {
    double xi = 0.03;
    double tau = 25.0;
    double epsilon = 0.1;
    int min_samples = 0;
    int hits = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--xi", xi, "quantile stability threshold");
        cmd->add_option("--tau", tau, "stability scale");
        cmd->add_option("--epsilon", epsilon, "coverage complement");
        cmd->add_option("--min-samples", min_samples,
                        "stop-count floor (0 = closed-form default)");
        cmd->add_option("--hits", hits, "consecutive satisfactions required");
    }

    StoppingConfig config() const {
        StoppingConfig cfg;
        cfg.xi = xi;
        cfg.tau = tau;
        cfg.epsilon = epsilon;
        cfg.min_samples = min_samples;
        cfg.consecutive_hits = hits;
        return cfg;
    }

    json echo() const {
        StoppingConfig cfg = config();
        return json{{"xi", xi},
                    {"tau", tau},
                    {"epsilon", epsilon},
                    {"min_samples", cfg.resolved_min_samples()},
                    {"hits", hits}};
    }
};

std::vector<JudgmentSample> to_samples(std::span<const JudgmentRecord> records) {
    std::vector<JudgmentSample> out;
    out.reserve(records.size());
    for (const auto& rec : records) out.push_back(to_sample(rec));
    return out;
}

json params_json(const MixtureParams& p) {
    return json{{"w", p.w},
                {"alpha1", p.alpha1},
                {"beta1", p.beta1},
                {"alpha2", p.alpha2},
                {"beta2", p.beta2}};
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    double w = 0.7, a1 = 8.0, b1 = 2.0, a2 = 1.5, b2 = 6.0;
    int k = 11;
    long n = 0;
    std::uint64_t seed = kDefaultSeed;
    std::string out;
    std::string emb_out;
    std::vector<double> emb_center;
    int emb_dim = 8;
    double emb_spread = 0.05;
    std::uint64_t emb_seed = 0;
};

int run_simulate(const SimulateArgs& args) {
    GeneratorSpec spec{{args.w, args.a1, args.b1, args.a2, args.b2}, args.k,
                       args.n, args.seed};
    spec.validate();
    auto records = sample_judgments(spec);
    json meta{{"format", "judgedist-records-v1"},
              {"rng", rng::kAlgorithmName},
              {"seed", args.seed},
              {"k", args.k},
              {"n", args.n},
              {"params", params_json(spec.params)}};
    write_records_jsonl(args.out, records, meta);
    say("simulate: wrote " + std::to_string(records.size()) + " records to " +
        args.out);

    if (!args.emb_out.empty()) {
        EmbeddingClusterSpec cluster;
        cluster.center = args.emb_center.empty()
                             ? std::vector<double>(args.emb_dim, 0.0)
                             : args.emb_center;
        cluster.spread = args.emb_spread;
        cluster.count = args.n;
        std::uint64_t eseed =
            args.emb_seed != 0 ? args.emb_seed : args.seed + 1;
        EmbeddingSet set = sample_embeddings(cluster, eseed);
        json emeta{{"format", "judgedist-embeddings-v1"},
                   {"rng", rng::kAlgorithmName},
                   {"seed", eseed},
                   {"dim", cluster.center.size()},
                   {"spread", args.emb_spread}};
        write_embeddings_jsonl(args.emb_out, set, emeta);
        say("simulate: wrote " + std::to_string(set.items.size()) +
            " embeddings to " + args.emb_out);
    }
    return kExitOk;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
    std::string in;
    std::string out;
    long r = 0;  // 0 = all
    std::uint64_t seed = kDefaultSeed;
    EmFlags em;
};

int run_fit(const FitArgs& args) {
    RecordFile file = read_records_jsonl(args.in);
    std::vector<JudgmentRecord> records = file.records;
    long used = static_cast<long>(records.size());
    if (args.r > 0) {
        if (args.r >= static_cast<long>(records.size())) {
            if (args.r > static_cast<long>(records.size())) {
                say("fit: warning: --r exceeds record count, using all " +
                    std::to_string(records.size()));
            }
        } else {
            rng::SplitMix64 g(args.seed);
            rng::shuffle(records, g);
            records.resize(static_cast<std::size_t>(args.r));
            used = args.r;
        }
    }
    if (records.size() < 2) {
        throw std::runtime_error("fit: need at least 2 usable records");
    }
    auto samples = to_samples(records);
    auto [params, trace] = fit_mixture(samples, args.em.config());

    json extra{{"r", used},
               {"k", file.k_max},
               {"trace",
                json{{"iterations", trace.iterations()},
                     {"converged", trace.converged},
                     {"log_likelihood", trace.log_likelihood.empty()
                                            ? 0.0
                                            : trace.log_likelihood.back()}}},
               {"config", args.em.echo()}};
    extra["config"]["seed"] = args.seed;
    write_params_json(args.out, params, extra);

    char line[160];
    std::snprintf(line, sizeof(line),
                  "fit: w=%.4f a1=%.4f b1=%.4f a2=%.4f b2=%.4f (%zu iterations, "
                  "%s)",
                  params.w, params.alpha1, params.beta1, params.alpha2,
                  params.beta2, trace.iterations(),
                  trace.converged ? "converged" : "NOT converged");
    say(line);
    return trace.converged ? kExitOk : kExitNoConvergence;
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
    std::string in;
    std::string method = "conformal";
    StopFlags stop;
    EmFlags em;
    std::uint64_t seed = kDefaultSeed;
    bool shuffle = true;
    int reps = 1;
    std::string out_params;
    std::string out_ids;
    std::string out_trace;
};

int run_sample(const SampleArgs& args) {
    RecordFile file = read_records_jsonl(args.in);
    StoppingConfig stopping = args.stop.config();
    stopping.validate();

    struct RepOutcome {
        std::vector<JudgmentSample> consumed;
        std::vector<std::string> ids;
        std::vector<double> means;
        std::vector<double> quantities;
        bool met = false;
    };
    std::vector<RepOutcome> outcomes;
    for (int rep = 0; rep < args.reps; ++rep) {
        std::vector<JudgmentRecord> pool = file.records;
        if (args.shuffle) {
            rng::SplitMix64 g(
                rng::derive_stream(args.seed, static_cast<std::uint64_t>(rep)));
            rng::shuffle(pool, g);
        }
        RepOutcome outcome;
        auto samples = to_samples(pool);
        if (args.method == "variance") {
            VarianceState state =
                variance_adaptive_sample(make_vector_stream(samples), stopping);
            outcome.met = state.criterion_met;
            outcome.consumed = state.observed;
            outcome.quantities = state.variance_history;
            double sum = 0.0;
            for (std::size_t i = 0; i < state.observed.size(); ++i) {
                sum += state.observed[i].s;
                outcome.means.push_back(sum / static_cast<double>(i + 1));
            }
        } else {
            ConformalState state =
                adaptive_sample(make_vector_stream(samples), stopping);
            outcome.met = state.criterion_met;
            outcome.consumed = state.observed;
            outcome.quantities = state.quantile_history;
            double sum = 0.0;
            for (std::size_t i = 0; i < state.observed.size(); ++i) {
                sum += state.observed[i].s;
                outcome.means.push_back(sum / static_cast<double>(i + 1));
            }
        }
        for (std::size_t i = 0; i < outcome.consumed.size(); ++i) {
            outcome.ids.push_back(pool[i].id);
        }
        outcomes.push_back(std::move(outcome));
    }

    const RepOutcome& first = outcomes.front();
    bool all_met = true;
    double mean_count = 0.0;
    json per_rep = json::array();
    for (const auto& o : outcomes) {
        all_met = all_met && o.met;
        mean_count += static_cast<double>(o.consumed.size());
        per_rep.push_back(json{{"samples", o.consumed.size()},
                               {"criterion_met", o.met}});
    }
    mean_count /= static_cast<double>(outcomes.size());

    auto [params, trace] = fit_mixture(first.consumed, args.em.config());
    json extra{{"r", first.consumed.size()},
               {"k", file.k_max},
               {"method", args.method},
               {"stopping", args.stop.echo()},
               {"criterion_met", first.met},
               {"mean_samples", mean_count},
               {"reps", per_rep},
               {"trace", json{{"iterations", trace.iterations()},
                              {"converged", trace.converged}}},
               {"config", args.em.echo()}};
    extra["config"]["seed"] = args.seed;
    extra["config"]["shuffle"] = args.shuffle;
    write_params_json(args.out_params, params, extra);

    if (!args.out_ids.empty()) {
        std::string ids;
        for (const auto& id : first.ids) ids += id + "\n";
        write_text_file(args.out_ids, ids);
    }
    if (!args.out_trace.empty()) {
        std::string csv = "# judgedist stopping trace v1\n";
        csv += std::string("r,running_mean,") +
               (args.method == "variance" ? "variance" : "quantile") + "\n";
        char buf[96];
        for (std::size_t i = 0; i < first.quantities.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.8f\n", i + 1,
                          first.means[i], first.quantities[i]);
            csv += buf;
        }
        write_text_file(args.out_trace, csv);
    }

    char line[160];
    std::snprintf(line, sizeof(line),
                  "sample: %s stopping, mean %.2f samples over %d rep(s), floor "
                  "%d%s",
                  args.method.c_str(), mean_count, args.reps,
                  stopping.resolved_min_samples(),
                  all_met ? "" : ", CRITERION UNMET");
    say(line);
    if (!all_met) return kExitCriterionUnmet;
    return trace.converged ? kExitOk : kExitNoConvergence;
}

// ---------------------------------------------------------------- transfer

struct TransferArgs {
    std::string target;
    std::string target_emb;
    std::vector<std::string> sources;  // "records_or_params,embeddings"
    long target_r = 0;
    std::uint64_t seed = kDefaultSeed;
    double steepness = 10.0;
    double threshold = 0.7;
    std::string size_weight = "log";
    std::string similarity = "cosine";
    std::string gate = "sigmoid";
    EmFlags em;
    std::string out_params;
    std::string out_weights;
};

int run_transfer(const TransferArgs& args) {
    RecordFile target_file = read_records_jsonl(args.target);
    EmbeddingSet target_emb = read_embeddings_jsonl(args.target_emb);

    std::vector<JudgmentRecord> target_records = target_file.records;
    if (args.target_r > 0 &&
        args.target_r < static_cast<long>(target_records.size())) {
        rng::SplitMix64 g(args.seed);
        rng::shuffle(target_records, g);
        target_records.resize(static_cast<std::size_t>(args.target_r));
    }

    TransferConfig cfg;
    cfg.steepness = args.steepness;
    cfg.threshold = args.threshold;
    cfg.size_weight = args.size_weight == "linear" ? SizeWeight::linear
                                                   : SizeWeight::log_size;
    cfg.similarity = args.similarity == "inverse_euclidean"
                         ? SimilarityKind::inverse_euclidean
                         : SimilarityKind::cosine;
    cfg.gate = args.gate == "none" ? Gate::none : Gate::sigmoid;
    cfg.validate();

    std::vector<SourceData> sources;
    std::vector<std::string> source_names;
    for (const std::string& spec : args.sources) {
        auto comma = spec.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error(
                "transfer: --source expects \"DATA,EMBEDDINGS\": " + spec);
        }
        std::string data = spec.substr(0, comma);
        std::string emb = spec.substr(comma + 1);
        SourceData src;
        src.embeddings = read_embeddings_jsonl(emb);
        if (data.size() > 5 && data.substr(data.size() - 5) == ".json") {
            ParamsFile pf = read_params_json(data);
            src.params = pf.params;
            src.fitted_r = pf.r.value_or(2);
        } else {
            RecordFile rf = read_records_jsonl(data);
            src.samples = to_samples(rf.records);
        }
        source_names.push_back(data);
        sources.push_back(std::move(src));
    }

    auto samples = to_samples(target_records);
    TransferEstimate est =
        transfer_estimate(samples, target_emb, sources, args.em.config(), cfg);

    json config_echo{{"steepness", args.steepness},
                     {"threshold", args.threshold},
                     {"size_weight", args.size_weight},
                     {"similarity", args.similarity},
                     {"gate", args.gate},
                     {"seed", args.seed},
                     {"target_r", samples.size()},
                     {"em", args.em.echo()}};
    json extra{{"r", samples.size()},
               {"k", target_file.k_max},
               {"target_only", params_json(est.target_only)},
               {"config", config_echo}};
    write_params_json(args.out_params, est.blended, extra);

    if (!args.out_weights.empty()) {
        std::string csv = "# judgedist transfer weights v1\n";
        csv += "index,dataset,r,similarity,lambda\n";
        char buf[256];
        for (std::size_t i = 0; i < est.weights.size(); ++i) {
            std::string name = i == 0 ? "target" : source_names[i - 1];
            std::snprintf(buf, sizeof(buf), "%zu,%s,%ld,%.6f,%.6f\n", i,
                          name.c_str(), est.sizes[i], est.similarities[i],
                          est.weights[i]);
            csv += buf;
        }
        write_text_file(args.out_weights, csv);
    }

    char line[200];
    std::snprintf(line, sizeof(line),
                  "transfer: blended %zu source(s): w=%.4f a1=%.4f b1=%.4f "
                  "a2=%.4f b2=%.4f",
                  sources.size(), est.blended.w, est.blended.alpha1,
                  est.blended.beta1, est.blended.alpha2, est.blended.beta2);
    say(line);
    return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string params;
    std::string ref_records;
    std::string ref_params;
    std::vector<int> k_list{1, 3, 5, 7, 9, 11};
    int reps = 1;
    long r = 0;
    std::uint64_t seed = kDefaultSeed;
    std::string out;
};

int run_evaluate(const EvaluateArgs& args) {
    if (args.ref_records.empty() == args.ref_params.empty()) {
        throw std::runtime_error(
            "evaluate: provide exactly one of --ref / --ref-params");
    }
    ParamsFile estimated = read_params_json(args.params);
    validate(estimated.params);

    std::optional<RecordFile> ref_file;
    std::optional<MixtureParams> ref_params;
    if (!args.ref_records.empty()) {
        ref_file = read_records_jsonl(args.ref_records);
    } else {
        ref_params = read_params_json(args.ref_params).params;
    }

    ExperimentReport report;
    for (int rep = 0; rep < args.reps; ++rep) {
        RepetitionResult result;
        result.run_id = rep;
        result.fitted = estimated.params;
        if (ref_file.has_value()) {
            std::vector<JudgmentRecord> pool = ref_file->records;
            if (args.r > 0 && args.r < static_cast<long>(pool.size())) {
                rng::SplitMix64 g(rng::derive_stream(
                    args.seed, static_cast<std::uint64_t>(rep)));
                rng::shuffle(pool, g);
                pool.resize(static_cast<std::size_t>(args.r));
            }
            result.report = error_margin(estimated.params, pool, args.k_list);
            result.samples_used = static_cast<long>(pool.size());
        } else {
            result.report =
                error_margin(estimated.params, *ref_params, args.k_list);
            result.samples_used = estimated.r.value_or(0);
        }
        report.runs.push_back(std::move(result));
    }
    aggregate_runs(report);

    std::string k_csv;
    for (int k : args.k_list) k_csv += (k_csv.empty() ? "" : "|") + std::to_string(k);
    std::string config_line = "evaluate params=" + args.params +
                              " k_list=" + k_csv +
                              " reps=" + std::to_string(args.reps) +
                              " r=" + std::to_string(args.r) +
                              " seed=" + std::to_string(args.seed);
    write_text_file(args.out, experiment_csv(report, config_line));

    char line[160];
    std::snprintf(line, sizeof(line),
                  "evaluate: mean margin %.4f%% (std %.4f%%) over %d rep(s)",
                  100.0 * report.margin_mean, 100.0 * report.margin_std,
                  args.reps);
    say(line);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "judgment-distribution toolkit: Beta-Binomial mixture estimation "
        "with conformal adaptive sampling and prior transfer"};
    app.require_subcommand(1);
    app.add_flag("--quiet", g_quiet, "suppress the stdout summary");
    app.set_config("--config", "", "read flag defaults from a config file");

    SimulateArgs sim;
    auto* csim = app.add_subcommand("simulate", "generate judgment records");
    csim->add_option("--w", sim.w, "mixture weight");
    csim->add_option("--a1", sim.a1, "component 1 alpha");
    csim->add_option("--b1", sim.b1, "component 1 beta");
    csim->add_option("--a2", sim.a2, "component 2 alpha");
    csim->add_option("--b2", sim.b2, "component 2 beta");
    csim->add_option("--k", sim.k, "judges per record");
    csim->add_option("--n", sim.n, "record count")->required();
    csim->add_option("--seed", sim.seed, "generator seed");
    csim->add_option("--out", sim.out, "output records JSONL")->required();
    csim->add_option("--emb-out", sim.emb_out, "optional embeddings JSONL");
    csim->add_option("--emb-center", sim.emb_center,
                     "embedding cluster center components");
    csim->add_option("--emb-dim", sim.emb_dim,
                     "embedding dimension when --emb-center is omitted");
    csim->add_option("--emb-spread", sim.emb_spread, "embedding cluster spread");
    csim->add_option("--emb-seed", sim.emb_seed,
                     "embedding seed (default: --seed + 1)");

    FitArgs fit;
    auto* cfit = app.add_subcommand("fit", "fit mixture parameters");
    cfit->add_option("--in", fit.in, "input records JSONL")->required();
    cfit->add_option("--out", fit.out, "output params JSON")->required();
    cfit->add_option("--r", fit.r, "subsample size (0 = all records)");
    cfit->add_option("--seed", fit.seed, "subsample shuffle seed");
    fit.em.attach(cfit);

    SampleArgs smp;
    auto* csmp = app.add_subcommand("sample", "adaptive sampling with stopping");
    csmp->add_option("--in", smp.in, "input records JSONL")->required();
    csmp->add_option("--method", smp.method, "conformal|variance")
        ->check(CLI::IsMember({"conformal", "variance"}));
    smp.stop.attach(csmp);
    smp.em.attach(csmp);
    csmp->add_option("--seed", smp.seed, "shuffle seed");
    csmp->add_flag("--shuffle,!--no-shuffle", smp.shuffle,
                   "shuffle records before streaming (default on)");
    csmp->add_option("--reps", smp.reps, "independent repetitions")
        ->check(CLI::PositiveNumber);
    csmp->add_option("--out-params", smp.out_params, "params JSON")->required();
    csmp->add_option("--out-ids", smp.out_ids, "consumed record ids");
    csmp->add_option("--out-trace", smp.out_trace, "stopping trace CSV");

    TransferArgs tra;
    auto* ctra = app.add_subcommand("transfer", "blend source priors");
    ctra->add_option("--target", tra.target, "target records JSONL")->required();
    ctra->add_option("--target-emb", tra.target_emb, "target embeddings JSONL")
        ->required();
    ctra->add_option("--source", tra.sources,
                     "source as \"RECORDS_OR_PARAMS,EMBEDDINGS\" (repeatable; "
                     ".json means pre-fitted params)");
    ctra->add_option("--target-r", tra.target_r, "target subsample (0 = all)");
    ctra->add_option("--seed", tra.seed, "subsample shuffle seed");
    ctra->add_option("--steepness", tra.steepness, "gate steepness");
    ctra->add_option("--threshold", tra.threshold, "gate similarity threshold");
    ctra->add_option("--size-weight", tra.size_weight, "log|linear")
        ->check(CLI::IsMember({"log", "linear"}));
    ctra->add_option("--similarity", tra.similarity, "cosine|inverse_euclidean")
        ->check(CLI::IsMember({"cosine", "inverse_euclidean"}));
    ctra->add_option("--gate", tra.gate, "sigmoid|none")
        ->check(CLI::IsMember({"sigmoid", "none"}));
    tra.em.attach(ctra);
    ctra->add_option("--out-params", tra.out_params, "blended params JSON")
        ->required();
    ctra->add_option("--out-weights", tra.out_weights, "weight table CSV");

    EvaluateArgs eva;
    auto* ceva = app.add_subcommand("evaluate", "error margins against a reference");
    ceva->add_option("--params", eva.params, "estimated params JSON")->required();
    ceva->add_option("--ref", eva.ref_records, "reference records JSONL");
    ceva->add_option("--ref-params", eva.ref_params, "reference params JSON");
    ceva->add_option("--k-list", eva.k_list, "odd ensemble sizes")
        ->delimiter(',');
    ceva->add_option("--reps", eva.reps, "repetitions")->check(CLI::PositiveNumber);
    ceva->add_option("--r", eva.r, "reference subsample per repetition (0 = all)");
    ceva->add_option("--seed", eva.seed, "subsample shuffle seed");
    ceva->add_option("--out", eva.out, "margin report CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (csim->parsed()) return run_simulate(sim);
        if (cfit->parsed()) return run_fit(fit);
        if (csmp->parsed()) return run_sample(smp);
        if (ctra->parsed()) return run_transfer(tra);
        if (ceva->parsed()) return run_evaluate(eva);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
