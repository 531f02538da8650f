// longcf: generate, rank and audit counterfactual explanations for tabular
// classifiers, using longitudinal data as the plausibility proxy.
//
// Subcommands: simulate | train | generate | rank | report. One JSON config
// drives each run; --seed/--k/--method/--output-dir/--jobs override the
// matching config fields so experiments stay reproducible as artifacts.

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "longcf/longcf.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace longcf;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> k;
    std::optional<std::string> method;
    std::optional<std::string> output_dir;
    unsigned jobs = 1;
};

json load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) raise(errc::invalid_argument, "config file not found: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        raise(errc::invalid_argument, "config " + path.string() + ": " + e.what());
    }
    return doc;
}

const json& require_block(const json& cfg, const std::string& name) {
    if (!cfg.contains(name) || !cfg[name].is_object())
        raise(errc::invalid_argument, "config is missing the '" + name + "' block");
    return cfg[name];
}

std::string require_path(const json& cfg, const std::string& key) {
    const json& paths = require_block(cfg, "paths");
    if (!paths.contains(key) || !paths[key].is_string())
        raise(errc::invalid_argument, "config paths." + key + " is required");
    return paths[key].get<std::string>();
}

template <typename T>
T field_or(const json& block, const std::string& key, T fallback) {
    if (!block.contains(key)) return fallback;
    try {
        return block[key].get<T>();
    } catch (const json::exception&) {
        raise(errc::invalid_argument, "config field '" + key + "' has the wrong type");
    }
}

// ---- metric block ----------------------------------------------------------

struct MetricSettings {
    LongitudinalConfig config;
    ScaleKind continuous = ScaleKind::Aad;
    CategoricalRateMode rate_mode = CategoricalRateMode::PerFeature;
    double tolerance = 1e-5;
};

MetricSettings metric_settings(const json& cfg) {
    MetricSettings out;
    if (!cfg.contains("metric")) return out;
    const json& m = cfg["metric"];
    out.config.s = field_or<std::size_t>(m, "s", 1);
    const std::string norm = field_or<std::string>(m, "norm", "l1");
    if (norm == "l1") out.config.norm = NormOrder::L1;
    else if (norm == "l2") out.config.norm = NormOrder::L2;
    else raise(errc::invalid_argument, "metric.norm must be 'l1' or 'l2'");
    const std::string scale = field_or<std::string>(m, "continuous_scale", "aad");
    if (scale == "aad") out.continuous = ScaleKind::Aad;
    else if (scale == "mad") out.continuous = ScaleKind::Mad;
    else raise(errc::invalid_argument, "metric.continuous_scale must be 'mad' or 'aad'");
    const std::string rate = field_or<std::string>(m, "categorical_rate", "per_feature");
    if (rate == "per_feature") out.rate_mode = CategoricalRateMode::PerFeature;
    else if (rate == "per_transition") out.rate_mode = CategoricalRateMode::PerTransition;
    else raise(errc::invalid_argument, "metric.categorical_rate is invalid");
    out.tolerance = field_or<double>(m, "tolerance", 1e-5);
    return out;
}

// ---- counterfactual csv layout ---------------------------------------------

const std::vector<std::string> kScoreColumns = {
    "subject_id", "candidate_rank", "method",  "valid",
    "proximity",  "sparsity",       "longitudinal_distance", "fitness"};

CsvTable counterfactuals_to_csv(const FeatureSchema& schema,
                                const std::vector<std::pair<std::size_t, CounterfactualSet>>& sets) {
    CsvTable table;
    table.header = kScoreColumns;
    for (const auto& f : schema.features) table.header.push_back(f.name);
    for (const auto& [subject_id, set] : sets) {
        for (const auto& c : set.candidates) {
            std::vector<std::string> rec;
            rec.push_back(std::to_string(subject_id));
            rec.push_back(std::to_string(c.rank));
            rec.push_back(set.method);
            rec.push_back(c.valid ? "1" : "0");
            rec.push_back(format_double(c.proximity));
            rec.push_back(format_double(c.sparsity));
            rec.push_back(format_double(c.longitudinal));
            rec.push_back(format_double(c.fitness));
            for (std::size_t j = 0; j < schema.size(); ++j) {
                if (schema.at(j).is_continuous())
                    rec.push_back(format_double(c.vec.real(j)));
                else
                    rec.push_back(
                        schema.at(j).levels[static_cast<std::size_t>(c.vec.level(j))]);
            }
            table.rows.push_back(std::move(rec));
        }
    }
    return table;
}

double cell_double(const std::string& cell, const std::string& what) {
    auto v = parse_double(cell);
    if (!v) raise(errc::malformed_document, "bad numeric cell in " + what + ": '" + cell + "'");
    return *v;
}

// reads a counterfactual csv back into per-subject sets (file order kept)
std::vector<std::pair<std::size_t, CounterfactualSet>> counterfactuals_from_csv(
    const fs::path& path, const FeatureSchema& schema,
    const std::vector<FeatureVector>& subjects) {
    const CsvTable table = read_csv_file(path);
    std::vector<std::size_t> cols;
    for (const auto& name : kScoreColumns) {
        const auto c = table.column(name);
        if (c < 0) raise(errc::missing_column, name);
        cols.push_back(static_cast<std::size_t>(c));
    }
    std::vector<std::size_t> feature_cols;
    for (const auto& f : schema.features) {
        const auto c = table.column(f.name);
        if (c < 0) raise(errc::missing_column, f.name);
        feature_cols.push_back(static_cast<std::size_t>(c));
    }

    std::vector<std::pair<std::size_t, CounterfactualSet>> sets;
    std::map<std::size_t, std::size_t> by_subject;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& rec = table.rows[i];
        const auto subject_id =
            static_cast<std::size_t>(cell_double(rec[cols[0]], "subject_id"));
        if (subject_id >= subjects.size())
            raise(errc::malformed_document,
                  "subject_id " + std::to_string(subject_id) + " is outside the subjects file");
        auto it = by_subject.find(subject_id);
        if (it == by_subject.end()) {
            CounterfactualSet set;
            set.subject = subjects[subject_id];
            set.method = rec[cols[2]];
            sets.emplace_back(subject_id, std::move(set));
            it = by_subject.emplace(subject_id, sets.size() - 1).first;
        }
        Candidate c;
        c.rank = static_cast<std::int32_t>(cell_double(rec[cols[1]], "candidate_rank"));
        c.valid = rec[cols[3]] == "1";
        c.proximity = cell_double(rec[cols[4]], "proximity");
        c.sparsity = cell_double(rec[cols[5]], "sparsity");
        c.longitudinal = cell_double(rec[cols[6]], "longitudinal_distance");
        c.fitness = cell_double(rec[cols[7]], "fitness");
        c.vec.values.resize(schema.size());
        for (std::size_t j = 0; j < schema.size(); ++j) {
            const std::string& cell = rec[feature_cols[j]];
            if (schema.at(j).is_continuous()) {
                c.vec.values[j] = cell_double(cell, schema.at(j).name);
            } else {
                const auto lv = schema.at(j).level_index(cell);
                if (lv < 0)
                    raise(errc::unknown_level, schema.at(j).name + ": '" + cell + "'");
                c.vec.values[j] = static_cast<double>(lv);
            }
        }
        auto& set = sets[it->second].second;
        set.candidates.push_back(std::move(c));
        set.requested = set.candidates.size();
    }
    return sets;
}

void add_id_column(CsvTable& table, const std::string& name,
                   const std::vector<std::string>& ids) {
    table.header.insert(table.header.begin(), name);
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        table.rows[i].insert(table.rows[i].begin(), ids[i]);
}

// ---- simulate ---------------------------------------------------------------

SimulationConfig simulation_settings(const json& cfg, std::uint64_t seed) {
    const json& sim = require_block(cfg, "simulation");
    SimulationConfig out;
    out.p_swap = field_or<double>(sim, "p_swap", 0.3);
    out.p_edu_bump = field_or<double>(sim, "p_edu_bump", 0.1);
    out.swap_features = field_or<std::vector<std::string>>(sim, "swap_features", {});
    out.education_feature = field_or<std::string>(sim, "education_feature", "education");
    out.age_feature = field_or<std::string>(sim, "age_feature", "age");
    const auto range = field_or<std::vector<std::int64_t>>(sim, "age_increment", {1, 10});
    if (range.size() != 2)
        raise(errc::invalid_argument, "simulation.age_increment must be [low, high]");
    out.age_min = range[0];
    out.age_max = range[1];
    out.seed = seed;
    return out;
}

int cmd_simulate(const json& cfg, const Overrides& over) {
    const json& sim = require_block(cfg, "simulation");
    const std::uint64_t seed =
        over.seed.value_or(field_or<std::uint64_t>(sim, "seed", 0));
    const std::string label = field_or<std::string>(sim, "label_column", "income");

    FeatureSchema schema;
    Dataset base;
    std::vector<std::string> ids;
    if (sim.contains("synthesize_rows")) {
        const auto rows = sim["synthesize_rows"].get<std::size_t>();
        base = make_adult_like(rows, derive_seed(seed, 1));
        schema = base.schema;
        save_schema(schema, require_path(cfg, "schema"));
        for (std::size_t i = 0; i < rows; ++i) ids.push_back(std::to_string(i));
    } else {
        schema = load_schema(require_path(cfg, "schema"));
        const fs::path data_path = require_path(cfg, "data");
        const CsvTable raw = read_csv_file(data_path);
        std::optional<std::string> label_col;
        if (raw.column(label) >= 0) label_col = label;
        base = load_dataset(data_path, schema, label_col);
        if (schema.id_column) {
            const auto c = raw.column(*schema.id_column);
            for (std::size_t i = 0; i < raw.rows.size(); ++i)
                ids.push_back(c >= 0 ? raw.rows[i][static_cast<std::size_t>(c)]
                                     : std::to_string(i));
        }
    }

    SimulationConfig config = simulation_settings(cfg, derive_seed(seed, 2));
    const SimulationResult result = simulate_second_timepoint(base, config);
    for (auto i : result.skipped_swaps)
        std::cerr << "simulate: no donor for individual " << i << "; swap skipped\n";

    Dataset t1 = base;
    Dataset t2;
    t2.schema = schema;
    t2.rows = result.pair.time2;

    CsvTable t1_csv = dataset_to_csv(t1, base.labels ? std::optional<std::string>(label)
                                                     : std::nullopt);
    CsvTable t2_csv = dataset_to_csv(t2);
    if (schema.id_column && !ids.empty()) {
        add_id_column(t1_csv, *schema.id_column, ids);
        add_id_column(t2_csv, *schema.id_column, ids);
    }
    write_csv_file(require_path(cfg, "t1"), t1_csv);
    write_csv_file(require_path(cfg, "t2"), t2_csv);
    std::cout << "simulated " << base.size() << " individuals -> " << require_path(cfg, "t1")
              << ", " << require_path(cfg, "t2") << "\n";
    return 0;
}

// ---- train ------------------------------------------------------------------

int cmd_train(const json& cfg, const Overrides& over) {
    const json& m = require_block(cfg, "model");
    const std::string label = field_or<std::string>(m, "label_column", "income");
    const std::uint64_t seed = over.seed.value_or(field_or<std::uint64_t>(m, "seed", 0));

    const FeatureSchema schema = load_schema(require_path(cfg, "schema"));
    const Dataset data = load_dataset(require_path(cfg, "data"), schema, label);

    const std::string kind = field_or<std::string>(m, "kind", "forest");
    std::unique_ptr<Classifier> model;
    if (kind == "forest") {
        model = train_forest(data, field_or<std::size_t>(m, "n_trees", 100),
                             field_or<std::size_t>(m, "max_depth", 8), seed);
    } else if (kind == "logistic") {
        model = train_logistic(data, field_or<std::size_t>(m, "epochs", 300),
                               field_or<double>(m, "learning_rate", 0.1), seed);
    } else {
        raise(errc::invalid_argument, "model.kind must be 'forest' or 'logistic'");
    }
    model->set_threshold(field_or<double>(m, "threshold", 0.5));
    save_model(*model, require_path(cfg, "model"));
    std::cout << "train_accuracy " << format_double(training_accuracy(*model, data)) << "\n";
    return 0;
}

// ---- generate ---------------------------------------------------------------

struct GenerationSetup {
    FeatureSchema schema;
    Dataset train_data;
    std::vector<FeatureVector> subjects;
    std::unique_ptr<Classifier> model;
    NormalizationProfile cross_profile;
    std::optional<DiffMatrix> diffs;
    NormalizationProfile long_profile;
    MetricSettings metric;
    FitnessConfig fitness;
    SearchConstraints constraints;
    GeneticParams genetic;
    RandomSearchParams random;
    std::string method = "genetic";
    std::int32_t desired = 1;
    std::uint64_t seed = 0;
    std::size_t max_subjects = 0;  // 0: no cap
};

FitnessConfig fitness_from(const json& gen) {
    FitnessConfig config = FitnessConfig::default_config();
    if (gen.contains("objectives")) {
        config.objectives.clear();
        for (const auto& jo : gen["objectives"]) {
            ObjectiveTerm term;
            const std::string kind = jo.at("kind").get<std::string>();
            if (kind == "proximity") term.kind = Objective::Proximity;
            else if (kind == "sparsity") term.kind = Objective::Sparsity;
            else if (kind == "longitudinal") term.kind = Objective::Longitudinal;
            else raise(errc::invalid_argument, "unknown objective '" + kind + "'");
            term.weight = jo.value("weight", 1.0);
            config.objectives.push_back(term);
        }
    }
    if (gen.contains("validity")) {
        const json& v = gen["validity"];
        const std::string mode = v.value("mode", "hinge");
        if (mode == "hinge") config.validity = ValidityMode::HingePenalty;
        else if (mode == "hard") config.validity = ValidityMode::HardConstraint;
        else raise(errc::invalid_argument, "generation.validity.mode must be hinge|hard");
        config.hinge_weight = v.value("weight", 10.0);
    }
    config.validate();
    return config;
}

GenerationSetup generation_setup(const json& cfg, const Overrides& over) {
    GenerationSetup setup;
    const json& gen = require_block(cfg, "generation");

    setup.schema = load_schema(require_path(cfg, "schema"));
    setup.train_data = load_dataset(require_path(cfg, "data"), setup.schema);
    setup.model = load_model(require_path(cfg, "model"), setup.schema);

    const json& paths = require_block(cfg, "paths");
    const std::string subjects_path =
        field_or<std::string>(paths, "subjects", paths.at("data").get<std::string>());
    setup.subjects = load_dataset(subjects_path, setup.schema).rows;

    setup.metric = metric_settings(cfg);
    setup.cross_profile = build_cross_profile(setup.train_data, setup.metric.tolerance);
    if (paths.contains("t1") && paths.contains("t2")) {
        const LongitudinalPair pair = load_longitudinal(
            require_path(cfg, "t1"), require_path(cfg, "t2"), setup.schema);
        setup.diffs = compute_diffs(pair);
        setup.long_profile = build_profile(*setup.diffs, setup.metric.continuous,
                                           setup.metric.tolerance, setup.metric.rate_mode);
    }

    setup.fitness = fitness_from(gen);
    if (setup.fitness.uses(Objective::Longitudinal) && !setup.diffs)
        raise(errc::invalid_argument,
              "the longitudinal objective requires paths.t1 and paths.t2");

    setup.desired = field_or<std::int32_t>(gen, "desired_class", 1);
    setup.method = over.method.value_or(field_or<std::string>(gen, "method", "genetic"));
    if (setup.method != "genetic" && setup.method != "random")
        raise(errc::invalid_argument, "generation.method must be 'genetic' or 'random'");
    setup.seed = over.seed.value_or(field_or<std::uint64_t>(gen, "seed", 0));

    setup.genetic.pop_size = field_or<std::size_t>(gen, "pop_size", 60);
    setup.genetic.p_mut = field_or<double>(gen, "p_mut", 0.3);
    setup.genetic.max_generations = field_or<std::size_t>(gen, "max_generations", 200);
    setup.genetic.convergence_epsilon = field_or<double>(gen, "convergence_epsilon", 1e-4);
    setup.genetic.patience = field_or<std::size_t>(gen, "patience", 5);
    setup.genetic.crossover_bias = field_or<double>(gen, "crossover_bias", 0.5);
    setup.genetic.k = over.k.value_or(field_or<std::size_t>(gen, "k", 10));
    setup.random.k = setup.genetic.k;
    setup.random.n_samples = field_or<std::size_t>(gen, "n_samples", 5000);
    setup.max_subjects = field_or<std::size_t>(gen, "max_subjects", 0);

    setup.constraints = SearchConstraints::for_data(
        setup.train_data, setup.desired, field_or<bool>(gen, "respect_immutable", true));
    for (const auto& name : field_or<std::vector<std::string>>(gen, "freeze", {}))
        setup.constraints.freeze(setup.schema, name);
    if (gen.contains("ranges")) {
        for (const auto& [name, range] : gen["ranges"].items()) {
            const auto j = setup.schema.index_of(name);
            if (!j) raise(errc::missing_column, name);
            if (!setup.schema.at(*j).is_continuous())
                raise(errc::invalid_argument, "ranges only apply to continuous features");
            setup.constraints.lower[*j] = range.at(0).get<double>();
            setup.constraints.upper[*j] = range.at(1).get<double>();
        }
    }
    return setup;
}

int cmd_generate(const json& cfg, const Overrides& over) {
    GenerationSetup setup = generation_setup(cfg, over);

    GenerationContext ctx;
    ctx.model = setup.model.get();
    ctx.schema = &setup.schema;
    ctx.cross_profile = &setup.cross_profile;
    if (setup.diffs) {
        ctx.diffs = &*setup.diffs;
        ctx.longitudinal_profile = &setup.long_profile;
    }
    ctx.longitudinal = setup.metric.config;
    ctx.desired_class = setup.desired;

    // subjects predicted with the undesired class, capped if configured
    std::vector<std::size_t> pending, skipped;
    std::size_t capped = 0;
    for (std::size_t i = 0; i < setup.subjects.size(); ++i) {
        if (setup.model->predict_class(setup.subjects[i]) == setup.desired) {
            skipped.push_back(i);
            continue;
        }
        if (setup.max_subjects == 0 || pending.size() < setup.max_subjects)
            pending.push_back(i);
        else
            ++capped;
    }
    if (capped > 0)
        std::cerr << "generate: max_subjects capped the run; " << capped
                  << " further subjects left unprocessed\n";

    std::vector<CounterfactualSet> results(pending.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= pending.size() || failed.load()) break;
            const std::size_t subject_id = pending[slot];
            try {
                const auto subject_seed = derive_seed(setup.seed, subject_id);
                results[slot] =
                    setup.method == "genetic"
                        ? run_genetic(setup.subjects[subject_id], setup.desired, setup.fitness,
                                      setup.constraints, setup.genetic, ctx, subject_seed)
                        : run_random(setup.subjects[subject_id], setup.desired, setup.fitness,
                                     setup.constraints, setup.random, ctx, subject_seed);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                failed = true;
            }
        }
    };
    const unsigned jobs = std::max(1u, over.jobs);
    std::vector<std::thread> threads;
    for (unsigned t = 1; t < jobs; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);

    for (auto i : skipped)
        std::cerr << "generate: subject " << i
                  << " already has the desired prediction; skipped\n";

    std::vector<std::pair<std::size_t, CounterfactualSet>> sets;
    for (std::size_t slot = 0; slot < pending.size(); ++slot) {
        if (results[slot].shortfall())
            std::cerr << "generate: subject " << pending[slot] << " received "
                      << results[slot].candidates.size() << " of "
                      << results[slot].requested << " requested candidates\n";
        sets.emplace_back(pending[slot], std::move(results[slot]));
    }
    const fs::path out = require_path(cfg, "counterfactuals");
    write_csv_file(out, counterfactuals_to_csv(setup.schema, sets));
    std::cout << "generated counterfactuals for " << pending.size() << " subjects ("
              << skipped.size() << " skipped) -> " << out.string() << "\n";
    return 0;
}

// ---- rank -------------------------------------------------------------------

int cmd_rank(const json& cfg, const Overrides&) {
    const FeatureSchema schema = load_schema(require_path(cfg, "schema"));
    const json& paths = require_block(cfg, "paths");
    const std::string subjects_path =
        field_or<std::string>(paths, "subjects", paths.at("data").get<std::string>());
    const std::vector<FeatureVector> subjects =
        load_dataset(subjects_path, schema).rows;

    const MetricSettings metric = metric_settings(cfg);
    const LongitudinalPair pair =
        load_longitudinal(require_path(cfg, "t1"), require_path(cfg, "t2"), schema);
    const DiffMatrix diffs = compute_diffs(pair);
    const NormalizationProfile profile =
        build_profile(diffs, metric.continuous, metric.tolerance, metric.rate_mode);

    const fs::path cf_path = require_path(cfg, "counterfactuals");
    auto sets = counterfactuals_from_csv(cf_path, schema, subjects);
    for (auto& [subject_id, set] : sets)
        set = score_set(set, diffs, profile, metric.config);

    write_csv_file(cf_path, counterfactuals_to_csv(schema, sets));
    std::cout << "ranked " << sets.size() << " subjects by longitudinal distance -> "
              << cf_path.string() << "\n";
    return 0;
}

// ---- report -----------------------------------------------------------------

std::vector<double> thresholds_from(const json& cfg) {
    std::vector<double> out;
    const json* block = nullptr;
    if (cfg.contains("report") && cfg["report"].contains("thresholds"))
        block = &cfg["report"]["thresholds"];
    if (block && block->is_array()) {
        for (const auto& t : *block) out.push_back(t.get<double>());
        if (out.empty() || !std::is_sorted(out.begin(), out.end()))
            raise(errc::invalid_argument, "report.thresholds must be ascending and nonempty");
        return out;
    }
    double lo = 1e-2, hi = 1e6;
    std::size_t points = 49;
    if (block && block->is_object()) {
        lo = block->value("min", lo);
        hi = block->value("max", hi);
        points = block->value("points", points);
    }
    if (!(lo > 0) || hi <= lo || points < 2)
        raise(errc::invalid_argument, "bad report.thresholds grid");
    for (std::size_t i = 0; i < points; ++i)
        out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) /
                                                 static_cast<double>(points - 1)));
    return out;
}

int cmd_report(const json& cfg, const Overrides& over) {
    const FeatureSchema schema = load_schema(require_path(cfg, "schema"));
    const json& paths = require_block(cfg, "paths");
    const std::string subjects_path =
        field_or<std::string>(paths, "subjects", paths.at("data").get<std::string>());
    const std::vector<FeatureVector> subjects = load_dataset(subjects_path, schema).rows;

    const MetricSettings metric = metric_settings(cfg);
    const LongitudinalPair pair =
        load_longitudinal(require_path(cfg, "t1"), require_path(cfg, "t2"), schema);
    const DiffMatrix diffs = compute_diffs(pair);
    const NormalizationProfile profile =
        build_profile(diffs, metric.continuous, metric.tolerance, metric.rate_mode);

    auto tagged = counterfactuals_from_csv(require_path(cfg, "counterfactuals"), schema, subjects);
    if (tagged.empty()) raise(errc::empty_input, "no counterfactuals to report on");
    std::vector<CounterfactualSet> sets;
    for (auto& [id, set] : tagged) sets.push_back(std::move(set));

    const json report = cfg.contains("report") ? cfg["report"] : json::object();
    const double cutoff = field_or<double>(report, "cutoff", 1e5);
    const fs::path out_dir =
        over.output_dir.value_or(field_or<std::string>(report, "output_dir", "out"));
    fs::create_directories(out_dir);

    const double reference = one_observation_threshold(diffs, profile);
    const ThresholdCurve curve = threshold_curve(sets, thresholds_from(cfg), reference);
    const AuditSummary summary = audit(sets, schema, cutoff);

    CsvTable curve_csv;
    curve_csv.header = {"threshold", "any_fraction", "mean_fraction"};
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
        curve_csv.rows.push_back({format_double(curve.thresholds[i]),
                                  format_double(curve.any_fraction[i]),
                                  format_double(curve.mean_fraction[i])});
    write_csv_file(out_dir / "curve.csv", curve_csv);

    json audit_json;
    audit_json["mean_validity"] = summary.mean_validity;
    audit_json["pct_validity_zero"] = summary.pct_validity_zero;
    audit_json["pct_validity_all"] = summary.pct_validity_all;
    audit_json["pct_immutable_changed"] = summary.pct_immutable_changed;
    audit_json["pct_big_distance"] = summary.pct_big_distance;
    audit_json["mean_features_changed"] = summary.mean_features_changed;
    audit_json["cutoff"] = summary.cutoff;
    audit_json["subjects"] = summary.subjects;
    audit_json["counterfactuals"] = summary.counterfactuals;
    audit_json["reference_threshold"] = reference;
    std::ofstream audit_out(out_dir / "audit.json", std::ios::binary);
    audit_out << audit_json.dump(2) << "\n";

    std::cout << "report written to " << (out_dir / "audit.json").string() << " and "
              << (out_dir / "curve.csv").string() << "\n";
    return 0;
}

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case errc::invalid_argument: return 1;
        case errc::infeasible_constraints: return 3;
        default: return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"counterfactual explanations with longitudinal plausibility"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides over;
    std::uint64_t seed_flag = 0;
    std::size_t k_flag = 0;
    std::string method_flag, output_flag;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration (json)")->required();
        cmd->add_option("--seed", seed_flag, "override the config seed");
        cmd->add_option("--jobs", over.jobs, "parallel subject workers")->default_val(1u);
    };

    CLI::App* simulate = app.add_subcommand("simulate", "write a simulated second time point");
    CLI::App* train = app.add_subcommand("train", "train and save a classifier");
    CLI::App* generate = app.add_subcommand("generate", "generate counterfactual sets");
    CLI::App* rank = app.add_subcommand("rank", "re-rank counterfactuals by longitudinal distance");
    CLI::App* report = app.add_subcommand("report", "write audit.json and curve.csv");
    for (auto* cmd : {simulate, train, generate, rank, report}) add_common(cmd);
    generate->add_option("--k", k_flag, "override the number of candidates per subject");
    generate->add_option("--method", method_flag, "genetic or random");
    report->add_option("--output-dir", output_flag, "override the report directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (simulate->count("--seed") || train->count("--seed") || generate->count("--seed") ||
        rank->count("--seed") || report->count("--seed"))
        over.seed = seed_flag;
    if (generate->count("--k")) over.k = k_flag;
    if (generate->count("--method")) over.method = method_flag;
    if (report->count("--output-dir")) over.output_dir = output_flag;

    try {
        const json cfg = load_config(config_path);
        if (simulate->parsed()) return cmd_simulate(cfg, over);
        if (train->parsed()) return cmd_train(cfg, over);
        if (generate->parsed()) return cmd_generate(cfg, over);
        if (rank->parsed()) return cmd_rank(cfg, over);
        if (report->parsed()) return cmd_report(cfg, over);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
