#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "dealscope/csv.hpp"
#include "dealscope/dataset.hpp"
#include "dealscope/evaluation.hpp"
#include "dealscope/features.hpp"
#include "dealscope/imputation.hpp"
#include "dealscope/ingest.hpp"
#include "dealscope/linkage.hpp"
#include "dealscope/manifest.hpp"
#include "dealscope/models/artifact.hpp"
#include "dealscope/rng.hpp"
#include "dealscope/sampling.hpp"
#include "dealscope/shap.hpp"
#include "dealscope/stats.hpp"
#include "dealscope/synth.hpp"

namespace fs = std::filesystem;
using namespace dealscope;

namespace {

// Exit code contract: 0 success, 1 internal error, 2 bad input/config.
constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitBadInput = 2;

// Per-stage seed streams derived from the root seed. The synth stage
// consumes the root directly (its generator derives its own streams).
constexpr std::uint64_t kSeedStreamTrain = 1;
constexpr std::uint64_t kSeedStreamEvaluate = 2;
constexpr std::uint64_t kSeedStreamExplain = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const std::string& stage, const std::string& path) {
    if (!fs::exists(path)) {
        throw UsageError("stage " + stage + ": missing input file: " + path);
    }
}

// Values collected from the command line. Only explicitly given flags
// are set; they override the config file key of the same name.
struct CliArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;

    // link
    std::optional<std::string> companies_csv;
    std::optional<std::string> deals_csv;
    std::optional<double> hi;
    std::optional<double> lo;
    // features
    std::optional<std::string> matches_csv;
    // train / evaluate / explain / stats
    std::optional<std::string> data_csv;
    std::optional<std::string> model_name;
    std::optional<std::string> sampler_name;
    std::optional<std::string> feature_set;
    std::optional<std::string> grid_path;
    std::optional<std::string> model_path;
};

struct Stage {
    std::string name;
    ConfigTree cfg;
    std::uint64_t root_seed = 42;
    unsigned threads = 0;
    std::string out_dir;
    RunManifest manifest;
    std::chrono::steady_clock::time_point started;
    bool seed_from_flag = false;
    bool threads_from_flag = false;

    std::string out_path(const std::string& file) const {
        return (fs::path(out_dir) / file).string();
    }

    void finish() {
        manifest.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        manifest.config = cfg.root();
        manifest.write(out_path(name + "_manifest.json"));
    }
};

const std::unordered_set<std::string>& known_top_level_keys() {
    static const std::unordered_set<std::string> keys = {
        "seed", "threads", "out",   "synth",   "link",  "features",
        "train", "evaluate", "explain", "stats", "pipeline"};
    return keys;
}

ConfigTree resolve_config(const CliArgs& args) {
    std::string path = args.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("DEALSCOPE_CONFIG")) path = env;
    }
    ConfigTree cfg;
    if (!path.empty()) {
        cfg = ConfigTree::load_file(path);
        for (const auto& [key, value] : cfg.root().items()) {
            (void)value;
            if (!known_top_level_keys().count(key)) {
                throw ConfigError("config: unknown key '" + key + "'");
            }
        }
    }
    if (args.seed) cfg.set("seed", *args.seed);
    if (args.threads) cfg.set("threads", *args.threads);
    if (args.out) cfg.set("out", *args.out);
    return cfg;
}

Stage make_stage(const CliArgs& args, const std::string& name) {
    Stage st;
    st.name = name;
    st.cfg = resolve_config(args);
    st.root_seed = st.cfg.get_uint("seed", 42);
    const std::int64_t threads = st.cfg.get_int("threads", 0);
    if (threads < 0) throw ConfigError("config key 'threads': expected non-negative integer");
    st.threads = static_cast<unsigned>(threads);
    st.out_dir = st.cfg.get_string("out", "out");
    st.seed_from_flag = args.seed.has_value();
    st.threads_from_flag = args.threads.has_value();
    // resolved values go back into the tree so the manifest snapshot is
    // complete even when everything came from defaults
    st.cfg.set("seed", st.root_seed);
    st.cfg.set("threads", threads);
    st.cfg.set("out", st.out_dir);
    fs::create_directories(st.out_dir);
    st.manifest.stage = name;
    st.manifest.seed = st.root_seed;
    st.manifest.threads = static_cast<int>(st.threads);
    st.started = std::chrono::steady_clock::now();
    return st;
}

std::uint64_t stage_seed(const Stage& st, std::uint64_t stream) {
    return Rng(st.root_seed).derive(stream).next();
}

std::string stage_input(Stage& st, const std::optional<std::string>& flag,
                        const std::string& config_key, const std::string& fallback) {
    std::string path = flag ? *flag : st.cfg.get_string(config_key, fallback);
    st.cfg.set(config_key, path);
    return path;
}

// ---- synth ----------------------------------------------------------

RunManifest run_synth(Stage st) {
    const nlohmann::json section = st.cfg.subtree("synth");
    synth::GeneratorConfig gc =
        section.empty() ? synth::GeneratorConfig() : synth::GeneratorConfig::from_json(section);
    if (st.seed_from_flag || !section.contains("seed")) gc.seed = st.root_seed;
    if (st.threads_from_flag || !section.contains("threads")) gc.threads = st.threads;
    st.cfg.set("synth", gc.to_json());

    const synth::GenerateSummary summary = synth::generate(gc, st.out_dir);
    st.manifest.add_output(summary.paths.companies_csv);
    st.manifest.add_output(summary.paths.financials_csv);
    st.manifest.add_output(summary.paths.officers_csv);
    st.manifest.add_output(summary.paths.deals_csv);
    st.manifest.add_output(summary.paths.truth_json);
    st.finish();
    std::printf("synth: companies=%zu positives=%zu deals=%zu financial_rows=%zu officer_rows=%zu\n",
                summary.n_companies, summary.n_positive, summary.n_deal_rows,
                summary.n_financial_rows, summary.n_officer_rows);
    return st.manifest;
}

// ---- link -----------------------------------------------------------

nlohmann::json funnel_json(const linkage::FunnelReport& funnel, double hi, double lo) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : funnel.rows) {
        rows.push_back({{"label", row.label}, {"count", row.count}, {"fraction", row.fraction}});
    }
    return nlohmann::json{{"rows", rows},
                          {"deal_records", funnel.deal_records},
                          {"unique_names", funnel.unique_names},
                          {"high", funnel.high},
                          {"mid_band", funnel.mid_band},
                          {"mid_matched", funnel.mid_matched},
                          {"total_matched", funnel.total_matched},
                          {"summary", funnel.summary},
                          {"thresholds", {{"hi", hi}, {"lo", lo}}}};
}

void write_matches_csv(const std::string& path, const std::vector<linkage::MatchResult>& matches) {
    CsvWriter w(path);
    w.write_row({"deal_name", "company_id", "ratio", "tier", "city_agreed", "reason"});
    for (const auto& m : matches) {
        w.write_row({m.deal_name, m.company_id, format_double(m.ratio), linkage::tier_name(m.tier),
                     m.city_agreed ? "1" : "0", m.reason});
    }
    w.close();
}

RunManifest run_link(Stage st, const CliArgs& args) {
    const std::string companies = stage_input(st, args.companies_csv, "link.companies_csv",
                                              st.out_path("companies.csv"));
    const std::string deals =
        stage_input(st, args.deals_csv, "link.deals_csv", st.out_path("deals.csv"));
    linkage::MatchOptions options;
    options.hi = args.hi ? *args.hi : st.cfg.get_double("link.hi", options.hi);
    options.lo = args.lo ? *args.lo : st.cfg.get_double("link.lo", options.lo);
    options.threads = st.threads;
    st.cfg.set("link.hi", options.hi);
    st.cfg.set("link.lo", options.lo);

    require_file("link", companies);
    require_file("link", deals);
    st.manifest.add_input(companies);
    st.manifest.add_input(deals);

    ingest::SourcePaths paths;
    paths.companies_csv = companies;
    paths.deals_csv = deals;
    const ingest::LoadResult loaded = ingest::load_sources(paths);

    const linkage::MatchOutput output =
        linkage::match_deals(loaded.store.deals, loaded.store.companies, options);

    const std::string matches_path = st.out_path("matches.csv");
    const std::string funnel_path = st.out_path("funnel.json");
    write_matches_csv(matches_path, output.matches);
    {
        std::ofstream out(funnel_path, std::ios::binary);
        out << funnel_json(output.funnel, options.hi, options.lo).dump(2) << "\n";
    }
    st.manifest.add_output(matches_path);
    st.manifest.add_output(funnel_path);
    st.finish();
    for (const auto& row : output.funnel.rows) {
        std::printf("link: %-55s %6zu  (%.1f%%)\n", row.label.c_str(), row.count,
                    row.fraction * 100.0);
    }
    std::printf("link: matched %s\n", output.funnel.summary.c_str());
    return st.manifest;
}

// ---- features -------------------------------------------------------

std::vector<linkage::MatchResult> read_matches_csv(const std::string& path) {
    CsvReader r(path, {"deal_name", "company_id", "ratio", "tier"});
    const auto c_name = r.column("deal_name"), c_id = r.column("company_id"),
               c_ratio = r.column("ratio"), c_tier = r.column("tier");
    const bool has_city = r.has_column("city_agreed");
    const std::size_t c_city = has_city ? r.column("city_agreed") : 0;
    std::vector<linkage::MatchResult> matches;
    std::vector<std::string> f;
    std::size_t line;
    while (r.next(f, line)) {
        linkage::MatchResult m;
        m.deal_name = f[c_name];
        m.company_id = f[c_id];
        const auto ratio = parse_double_field(f[c_ratio]);
        if (!ratio) {
            throw UsageError("stage features: " + path + " line " + std::to_string(line) +
                             ": malformed ratio");
        }
        m.ratio = *ratio;
        m.tier = linkage::tier_from_name(f[c_tier]);
        if (has_city) m.city_agreed = parse_bool_field(f[c_city]).value_or(false);
        matches.push_back(std::move(m));
    }
    return matches;
}

RunManifest run_features(Stage st, const CliArgs& args) {
    const std::string companies = stage_input(st, args.companies_csv, "features.companies_csv",
                                              st.out_path("companies.csv"));
    const std::string financials =
        stage_input(st, {}, "features.financials_csv", st.out_path("financials.csv"));
    const std::string officers =
        stage_input(st, {}, "features.officers_csv", st.out_path("officers.csv"));
    const std::string deals =
        stage_input(st, args.deals_csv, "features.deals_csv", st.out_path("deals.csv"));
    const std::string matches_path =
        stage_input(st, args.matches_csv, "features.matches_csv", st.out_path("matches.csv"));
    for (const auto& p : {companies, financials, officers, deals, matches_path}) {
        require_file("features", p);
        st.manifest.add_input(p);
    }

    ingest::SourcePaths paths;
    paths.companies_csv = companies;
    paths.financials_csv = financials;
    paths.officers_csv = officers;
    paths.deals_csv = deals;
    ingest::LoadResult loaded = ingest::load_sources(paths);
    const std::size_t institutional = ingest::remove_institutional_officers(loaded.store);

    const std::vector<linkage::MatchResult> matches = read_matches_csv(matches_path);
    std::unordered_set<std::string> accepted_ids;
    for (const auto& m : matches) {
        if (m.accepted()) accepted_ids.insert(m.company_id);
    }

    ingest::TrimSummary trim;
    const double trim_fraction = st.cfg.get_double("features.trim_fraction", 0.025);
    st.cfg.set("features.trim_fraction", trim_fraction);
    const auto kept = ingest::dedupe_and_trim(
        ingest::make_matched_companies(loaded.store, matches), trim_fraction, &trim);

    features::AssembleOptions options;
    options.threads = st.threads;
    const std::string snapshot = st.cfg.get_string("features.snapshot_date", "");
    if (!snapshot.empty()) {
        const auto parsed = Date::parse_iso(snapshot);
        if (!parsed) {
            throw ConfigError("config key 'features.snapshot_date': not an ISO date: " + snapshot);
        }
        options.snapshot_date = parsed;
    }
    options.policy.strategy = ImputationPolicy::strategy_from_name(
        st.cfg.get_string("features.imputation", "median"));
    options.policy.add_missing_indicators =
        st.cfg.get_bool("features.add_missing_indicators", true);
    st.cfg.set("features.imputation", options.policy.strategy_name());
    st.cfg.set("features.add_missing_indicators", options.policy.add_missing_indicators);

    const features::AssembleResult result =
        features::assemble_dataset(loaded.store, kept, accepted_ids, options);
    st.cfg.set("features.snapshot_date", result.snapshot_date.iso());

    const std::string dataset_path = st.out_path("dataset.csv");
    const std::string sidecar_path = st.out_path("dataset.json");
    write_dataset_csv(result.dataset, dataset_path);
    write_dataset_sidecar(result.dataset, sidecar_path, result.snapshot_date.iso(),
                          options.policy.strategy_name());
    st.manifest.add_output(dataset_path);
    st.manifest.add_output(sidecar_path);
    st.finish();
    std::printf("features: rows=%zu features=%zu positives=%zu snapshot=%s\n",
                result.dataset.n(), result.dataset.d(), result.dataset.positives(),
                result.snapshot_date.iso().c_str());
    std::printf(
        "features: institutional_removed=%zu matched_rows=%zu deduped=%zu collapsed=%zu "
        "trimmed=%zu kept=%zu\n",
        institutional, trim.input_rows, trim.deduped, trim.collapsed, trim.trimmed, trim.kept);
    return st.manifest;
}

// ---- train ----------------------------------------------------------

nlohmann::json imputation_sidecar(const FittedImputation& fitted,
                                  const ImputationPolicy& policy) {
    return nlohmann::json{{"strategy", policy.strategy_name()}, {"fill", fitted.fill}};
}

void apply_imputation_json(Dataset& ds, const nlohmann::json& imputation) {
    FittedImputation fitted;
    fitted.fill = imputation.at("fill").get<std::vector<double>>();
    if (fitted.fill.size() != ds.d()) {
        throw UsageError("stage explain: artifact imputation width " +
                         std::to_string(fitted.fill.size()) + " does not match dataset width " +
                         std::to_string(ds.d()));
    }
    fitted.apply(ds);
}

RunManifest run_train(Stage st, const CliArgs& args) {
    const std::string data_path =
        stage_input(st, args.data_csv, "train.dataset", st.out_path("dataset.csv"));
    require_file("train", data_path);
    st.manifest.add_input(data_path);

    const std::string model_name =
        args.model_name ? *args.model_name : st.cfg.get_string("train.model", "xgb");
    const std::string sampler_name =
        args.sampler_name ? *args.sampler_name : st.cfg.get_string("train.sampler", "smote");
    const std::string set_name =
        args.feature_set ? *args.feature_set : st.cfg.get_string("train.features", "all");
    st.cfg.set("train.model", model_name);
    st.cfg.set("train.sampler", sampler_name);
    st.cfg.set("train.features", set_name);

    const models::ModelKind kind = models::model_from_name(model_name);
    const sampling::SamplerKind sampler = sampling::sampler_from_name(sampler_name);
    const FeatureSet feature_set = feature_set_from_name(set_name);

    Dataset ds = read_dataset_csv(data_path);
    Dataset sub = ds.select_columns(ds.columns_for(feature_set));

    ImputationPolicy policy;
    policy.strategy =
        ImputationPolicy::strategy_from_name(st.cfg.get_string("train.imputation", "median"));
    st.cfg.set("train.imputation", policy.strategy_name());
    const FittedImputation fitted = fit_imputation(sub, policy);
    fitted.apply(sub);

    Rng seq(stage_seed(st, kSeedStreamTrain));
    const std::uint64_t sampler_seed = seq.next();
    const std::uint64_t model_seed = seq.next();

    sampling::SamplerSpec sampler_spec;
    sampler_spec.kind = sampler;
    sampler_spec.k_neighbors = static_cast<int>(st.cfg.get_int("train.smote_k", 5));
    sampler_spec.target_ratio = st.cfg.get_double("train.target_ratio", 1.0);
    sampler_spec.seed = sampler_seed;
    sampling::SampleResult sample = sampling::apply_sampler(sub, sampler_spec);

    models::ModelSpec spec;
    spec.kind = kind;
    spec.params = st.cfg.subtree("train.params." + model_name);
    spec.seed = model_seed;
    models::ModelArtifact artifact =
        models::fit_model(spec, {sample.data.x.data(), sample.data.n(), sample.data.d()},
                          sample.data.y, sample.data.feature_names, st.threads);
    artifact.imputation = imputation_sidecar(fitted, policy);

    const std::string artifact_path =
        args.model_path ? *args.model_path : st.cfg.get_string("train.artifact",
                                                               st.out_path("model.json"));
    st.cfg.set("train.artifact", artifact_path);
    artifact.save(artifact_path);
    st.manifest.add_output(artifact_path);
    st.finish();
    std::printf("train: model=%s sampler=%s features=%s rows=%zu (resampled %zu) converged=%s\n",
                models::model_name(kind), sampling::sampler_name(sampler),
                feature_set_name(feature_set), sub.n(), sample.data.n(),
                artifact.converged ? "yes" : "no");
    return st.manifest;
}

// ---- evaluate -------------------------------------------------------

RunManifest run_evaluate(Stage st, const CliArgs& args) {
    const std::string data_path =
        stage_input(st, args.data_csv, "evaluate.dataset", st.out_path("dataset.csv"));
    require_file("evaluate", data_path);
    st.manifest.add_input(data_path);

    eval::GridConfig grid;
    if (args.grid_path) {
        require_file("evaluate", *args.grid_path);
        st.manifest.add_input(*args.grid_path);
        std::ifstream in(*args.grid_path, std::ios::binary);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("grid file " + *args.grid_path + ": " + e.what());
        }
        grid = eval::GridConfig::from_json(j);
    } else if (st.cfg.has("evaluate.grid")) {
        grid = eval::GridConfig::from_json(st.cfg.subtree("evaluate.grid"));
    } else {
        grid = eval::GridConfig::defaults();
    }
    st.cfg.set("evaluate.grid", grid.to_json());

    const Dataset ds = read_dataset_csv(data_path);
    const std::uint64_t seed = stage_seed(st, kSeedStreamEvaluate);
    const eval::GridResult result = eval::run_protocol(ds, grid, seed, st.threads);

    const std::string cells_path = st.out_path("grid_cells.csv");
    const std::string aggregate_path = st.out_path("grid_aggregate.csv");
    eval::write_grid_csv(result, cells_path);
    eval::write_aggregate_csv(result, aggregate_path);
    st.manifest.add_output(cells_path);
    st.manifest.add_output(aggregate_path);
    st.finish();

    std::size_t failed = 0;
    const eval::CellResult* best = nullptr;
    for (const auto& cell : result.cells) {
        if (cell.failed) {
            ++failed;
        } else if (!best || cell.holdout.f1 > best->holdout.f1) {
            best = &cell;
        }
    }
    std::printf("evaluate: cells=%zu failed=%zu holdout_rows=%zu cv_rows=%zu\n",
                result.cells.size(), failed, result.holdout_rows, result.cv_rows);
    if (best) {
        std::printf("evaluate: best holdout F1 %.4f (%s, %s, %s)\n", best->holdout.f1,
                    feature_set_name(best->feature_set), sampling::sampler_name(best->sampler),
                    models::model_name(best->model));
    }
    return st.manifest;
}

// ---- explain --------------------------------------------------------

RunManifest run_explain(Stage st, const CliArgs& args) {
    const std::string model_path =
        stage_input(st, args.model_path, "explain.model", st.out_path("model.json"));
    const std::string data_path =
        stage_input(st, args.data_csv, "explain.data", st.out_path("dataset.csv"));
    require_file("explain", model_path);
    require_file("explain", data_path);
    st.manifest.add_input(model_path);
    st.manifest.add_input(data_path);

    const models::ModelArtifact artifact = models::ModelArtifact::load(model_path);
    const Dataset full = read_dataset_csv(data_path);
    std::vector<std::size_t> cols;
    cols.reserve(artifact.feature_names.size());
    for (const auto& name : artifact.feature_names) {
        try {
            cols.push_back(full.column_index(name));
        } catch (const std::exception&) {
            throw UsageError("stage explain: dataset is missing feature '" + name + "'");
        }
    }
    Dataset ds = full.select_columns(cols);
    if (artifact.imputation) apply_imputation_json(ds, *artifact.imputation);

    const std::int64_t max_rows = st.cfg.get_int("explain.max_rows", 0);
    st.cfg.set("explain.max_rows", max_rows);
    if (max_rows > 0 && static_cast<std::size_t>(max_rows) < ds.n()) {
        std::vector<std::size_t> head(static_cast<std::size_t>(max_rows));
        for (std::size_t i = 0; i < head.size(); ++i) head[i] = i;
        ds = ds.select_rows(head);
    }

    // Non-tree artifacts explain against a background sample; trees use
    // the path method and need none.
    std::optional<Dataset> background;
    if (artifact.tree_count() == 0) {
        const auto rows_wanted = static_cast<std::size_t>(
            st.cfg.get_int("explain.background_rows", 100));
        Rng rng(stage_seed(st, kSeedStreamExplain));
        std::vector<std::size_t> all(ds.n());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        rng.shuffle(all);
        all.resize(std::min(rows_wanted, all.size()));
        std::sort(all.begin(), all.end());
        background = ds.select_rows(all);
    }

    const std::vector<shap::ShapVector> rows =
        shap::shap_batch(artifact, ds, background ? &*background : nullptr, st.threads);
    const auto ranking = shap::global_importance(rows, ds.d());

    const std::string phi_path = st.out_path("shap_values.csv");
    const std::string importance_path = st.out_path("importance.json");
    shap::write_phi_csv(phi_path, ds.ids, ds.feature_names, rows);
    shap::write_importance_json(importance_path, ds.feature_names, ranking);
    st.manifest.add_output(phi_path);
    st.manifest.add_output(importance_path);

    const bool default_interactions = artifact.tree_count() > 0;
    const bool interactions = st.cfg.get_bool("explain.interactions", default_interactions);
    st.cfg.set("explain.interactions", interactions);
    if (interactions) {
        const auto cap = static_cast<std::size_t>(
            st.cfg.get_int("explain.interaction_rows", 50));
        const std::size_t n = std::min(cap, ds.n());
        std::vector<shap::InteractionMatrix> mats;
        mats.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            mats.push_back(shap::shap_interactions(artifact, ds.x.data() + i * ds.d()));
        }
        std::vector<std::string> ids(ds.ids.begin(), ds.ids.begin() + static_cast<long>(n));
        const std::string inter_path = st.out_path("shap_interactions.csv");
        shap::write_interactions_csv(inter_path, ids, ds.feature_names, mats);
        st.manifest.add_output(inter_path);
    }
    st.finish();

    std::printf("explain: rows=%zu features=%zu\n", ds.n(), ds.d());
    for (std::size_t i = 0; i < ranking.size() && i < 5; ++i) {
        std::printf("explain: #%zu %s (mean |phi| %.5f)\n", i + 1,
                    ds.feature_names[ranking[i].feature].c_str(), ranking[i].mean_abs_phi);
    }
    return st.manifest;
}

// ---- stats ----------------------------------------------------------

RunManifest run_stats(Stage st, const CliArgs& args) {
    std::vector<eval::DescriptiveRow> rows;
    if (args.data_csv || st.cfg.has("stats.dataset")) {
        const std::string data_path =
            stage_input(st, args.data_csv, "stats.dataset", st.out_path("dataset.csv"));
        require_file("stats", data_path);
        st.manifest.add_input(data_path);
        rows = eval::descriptive_stats(read_dataset_csv(data_path));
    } else {
        const std::string companies = stage_input(st, args.companies_csv, "stats.companies_csv",
                                                  st.out_path("companies.csv"));
        const std::string financials =
            stage_input(st, {}, "stats.financials_csv", st.out_path("financials.csv"));
        const std::string officers =
            stage_input(st, {}, "stats.officers_csv", st.out_path("officers.csv"));
        const std::string deals =
            stage_input(st, args.deals_csv, "stats.deals_csv", st.out_path("deals.csv"));
        for (const auto& p : {companies, financials, officers, deals}) {
            require_file("stats", p);
            st.manifest.add_input(p);
        }
        ingest::SourcePaths paths;
        paths.companies_csv = companies;
        paths.financials_csv = financials;
        paths.officers_csv = officers;
        paths.deals_csv = deals;
        ingest::LoadResult loaded = ingest::load_sources(paths);
        ingest::remove_institutional_officers(loaded.store);

        Date as_of{};
        const std::string as_of_text = st.cfg.get_string("stats.as_of", "");
        if (!as_of_text.empty()) {
            const auto parsed = Date::parse_iso(as_of_text);
            if (!parsed) {
                throw ConfigError("config key 'stats.as_of': not an ISO date: " + as_of_text);
            }
            as_of = *parsed;
        } else {
            int latest_year = 0;
            for (const auto& fr : loaded.store.financials) {
                latest_year = std::max(latest_year, fr.year);
            }
            as_of = latest_year ? Date::from_ymd(latest_year, 12, 31) : Date::from_ymd(1970, 1, 1);
        }
        st.cfg.set("stats.as_of", as_of.iso());
        rows = eval::descriptive_stats_store(loaded.store, as_of);
    }

    const std::string stats_path = st.out_path("stats.csv");
    eval::write_descriptive_csv(rows, stats_path);
    st.manifest.add_output(stats_path);
    st.finish();
    for (const auto& row : rows) {
        std::printf("stats: %-22s n=%lld missing=%.1f%% median=%.3f mean=%.3f\n",
                    row.field.c_str(), row.n_total, row.missing_fraction * 100.0, row.median,
                    row.mean);
    }
    return st.manifest;
}

// ---- pipeline -------------------------------------------------------

RunManifest run_pipeline(const CliArgs& args) {
    Stage st = make_stage(args, "pipeline");
    std::vector<std::string> stages = {"synth", "link",  "features", "stats",
                                       "evaluate", "train", "explain"};
    if (st.cfg.has("pipeline.stages")) {
        const auto j = st.cfg.root().at("pipeline").at("stages");
        if (!j.is_array()) throw ConfigError("config key 'pipeline.stages': expected array");
        stages = j.get<std::vector<std::string>>();
    }
    st.cfg.set("pipeline.stages", stages);

    // pipeline stages read the same resolved config; flags do not leak
    // into individual stages beyond the globals
    CliArgs stage_args;
    stage_args.config_path = args.config_path;
    stage_args.seed = args.seed;
    stage_args.threads = args.threads;
    stage_args.out = args.out;

    for (const auto& name : stages) {
        RunManifest sub;
        try {
            if (name == "synth") {
                sub = run_synth(make_stage(stage_args, name));
            } else if (name == "link") {
                sub = run_link(make_stage(stage_args, name), stage_args);
            } else if (name == "features") {
                sub = run_features(make_stage(stage_args, name), stage_args);
            } else if (name == "train") {
                sub = run_train(make_stage(stage_args, name), stage_args);
            } else if (name == "evaluate") {
                sub = run_evaluate(make_stage(stage_args, name), stage_args);
            } else if (name == "explain") {
                sub = run_explain(make_stage(stage_args, name), stage_args);
            } else if (name == "stats") {
                sub = run_stats(make_stage(stage_args, name), stage_args);
            } else {
                throw ConfigError("config key 'pipeline.stages': unknown stage '" + name + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception& e) {
            throw std::runtime_error("stage " + name + ": " + e.what());
        }
        for (const auto& [path, digest] : sub.output_digests) {
            st.manifest.output_digests[path] = digest;
        }
        for (const auto& path : sub.output_paths) st.manifest.output_paths.push_back(path);
    }
    st.finish();
    std::printf("pipeline: %zu stages complete, %zu outputs\n", stages.size(),
                st.manifest.output_paths.size());
    return st.manifest;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deal screening pipeline"};
    app.require_subcommand(1);

    CliArgs args;
    app.add_option("--config", args.config_path,
                   "config file (JSON key tree; env DEALSCOPE_CONFIG is the fallback)");
    app.add_option("--seed", args.seed, "root seed (overrides config key 'seed')");
    app.add_option("--threads", args.threads, "worker threads, 0 = hardware");
    app.add_option("--out", args.out, "output directory (default 'out')");
    app.fallthrough();

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    CLI::App* link = app.add_subcommand("link", "fuzzy-match deal names to companies");
    link->add_option("--companies", args.companies_csv, "companies csv");
    link->add_option("--deals", args.deals_csv, "deals csv");
    link->add_option("--hi", args.hi, "high-confidence ratio threshold");
    link->add_option("--lo", args.lo, "city-assisted ratio threshold");
    CLI::App* feats = app.add_subcommand("features", "assemble the modeling dataset");
    feats->add_option("--matches", args.matches_csv, "matches csv from the link stage");
    CLI::App* train = app.add_subcommand("train", "fit one classifier and save the artifact");
    train->add_option("--data", args.data_csv, "dataset csv");
    train->add_option("--model", args.model_name, "lr|dt|rf|knn|svm|xgb");
    train->add_option("--sampler", args.sampler_name, "undersample|oversample|smote|none");
    train->add_option("--features", args.feature_set, "financial|director|all");
    train->add_option("--artifact", args.model_path, "output artifact path");
    CLI::App* evaluate = app.add_subcommand("evaluate", "run the models x samplers x features grid");
    evaluate->add_option("--data", args.data_csv, "dataset csv");
    evaluate->add_option("--grid", args.grid_path, "grid config JSON file");
    CLI::App* explain = app.add_subcommand("explain", "attribution values for a trained model");
    explain->add_option("--model", args.model_path, "model artifact JSON");
    explain->add_option("--data", args.data_csv, "dataset csv");
    CLI::App* stats = app.add_subcommand("stats", "descriptive statistics tables");
    stats->add_option("--data", args.data_csv, "dataset csv (default: raw source tables)");
    CLI::App* pipeline = app.add_subcommand("pipeline", "run all stages in order");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (synth->parsed()) {
            run_synth(make_stage(args, "synth"));
        } else if (link->parsed()) {
            run_link(make_stage(args, "link"), args);
        } else if (feats->parsed()) {
            run_features(make_stage(args, "features"), args);
        } else if (train->parsed()) {
            run_train(make_stage(args, "train"), args);
        } else if (evaluate->parsed()) {
            run_evaluate(make_stage(args, "evaluate"), args);
        } else if (explain->parsed()) {
            run_explain(make_stage(args, "explain"), args);
        } else if (stats->parsed()) {
            run_stats(make_stage(args, "stats"), args);
        } else if (pipeline->parsed()) {
            run_pipeline(args);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadInput;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInternal;
    }
    return kExitOk;
}
