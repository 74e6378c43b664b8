#include "commands.hpp"

#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "comets/diffusion/sampler.hpp"
#include "comets/diffusion/train.hpp"
#include "comets/error.hpp"
#include "comets/eval/report.hpp"
#include "comets/gan/train.hpp"
#include "comets/generation/reactivity.hpp"
#include "comets/generation/rollout.hpp"
#include "comets/io.hpp"
#include "comets/nn/checkpoint.hpp"
#include "comets/rng.hpp"
#include "comets/ts/csv.hpp"
#include "comets/ts/preprocess.hpp"
#include "comets/ts/segment.hpp"
#include "comets/ts/synthetic.hpp"

namespace comets::cli {
namespace fs = std::filesystem;
namespace {

void emit(const Invocation& inv, const nlohmann::json& line) {
    if (!inv.quiet) std::cerr << line.dump() << '\n';
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

fs::path prepare_out(const Invocation& inv) {
    fs::create_directories(inv.out);
    return inv.out;
}

fs::path require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw SpecificationError(what + " is not set");
    if (!fs::is_regular_file(path)) throw SpecificationError(what + " not found: " + path);
    return path;
}

fs::path input_or(const Invocation& inv, const std::string& key, const fs::path& fallback) {
    const auto v = inv.config.get_string(key);
    return require_file(v.empty() ? fallback.string() : v, key);
}

ts::MultivariateSeries load_data(const Invocation& inv) {
    return ts::read_series_csv(require_file(inv.config.get_string("data.path"), "data.path"));
}

ts::PreprocessState preprocess_state(const Invocation& inv, const ts::MultivariateSeries& series) {
    const auto path = inv.config.get_string("preprocess.path");
    if (path.empty()) return ts::fit_preprocess(series);
    return ts::PreprocessState::from_json(nlohmann::json::parse(read_file(require_file(path, "preprocess.path"))));
}

gan::GanConfig gan_config(const RunConfig& c, const ts::MultivariateSeries& series) {
    auto cfg = gan::GanConfig::make(c.get_size("gan.past"), c.get_size("gan.future"), series.channel_count());
    auto& g = cfg.generator;
    g.hidden = c.get_size("gan.hidden");
    g.kernel = c.get_size("gan.kernel");
    g.dilations = c.get_uints("gan.dilations");
    g.time_embed_dim = c.get_size("gan.time_embed_dim");
    g.dropout = c.get_float("gan.dropout");
    g.bounded_channels.clear();
    for (const auto& m : series.channels) g.bounded_channels.push_back(m.kind == ts::ChannelKind::Volume);
    auto& d = cfg.critic;
    d.conv_channels = c.get_uints("gan.critic_conv");
    d.kernel = c.get_size("gan.critic_kernel");
    d.stride = c.get_size("gan.critic_stride");
    d.linear = c.get_uints("gan.critic_linear");
    d.time_embed_dim = c.get_size("gan.time_embed_dim");
    d.alpha = c.get_float("gan.alpha");
    cfg.adam_g = {c.get_float("gan.lr_g"), c.get_float("gan.beta1"), c.get_float("gan.beta2")};
    cfg.adam_d = {c.get_float("gan.lr_d"), c.get_float("gan.beta1"), c.get_float("gan.beta2")};
    cfg.validate();
    return cfg;
}

std::unique_ptr<gan::GanModel> load_gan(const Invocation& inv) {
    return gan::GanModel::load(input_or(inv, "gan.checkpoint", inv.out / "gan.ckpt"));
}

/// The preprocessed series and the rollout starting point taken from it.
struct RolloutStart {
    ts::MultivariateSeries raw;
    ts::PreprocessState state;
    ts::MultivariateSeries model_space;
    Matrix window;
    int minute = 0;
    std::vector<double> anchors;  // raw price after the window, one per price channel
};

RolloutStart rollout_start(const Invocation& inv, std::size_t past) {
    RolloutStart s;
    s.raw = load_data(inv);
    s.state = preprocess_state(inv, s.raw);
    s.model_space = ts::apply_preprocess(s.raw, s.state);
    const std::size_t row = inv.config.get_size("generate.start_row");
    if (row + past > s.model_space.length()) {
        throw SpecificationError("generate.start_row " + std::to_string(row) + " leaves fewer than " +
                                 std::to_string(past) + " conditioning rows");
    }
    s.window = s.model_space.values.slice_rows(row, row + past);
    s.minute = s.model_space.minute_of_day()[row];
    // Preprocessed row r is the step from raw row r to r + 1.
    for (std::size_t c = 0; c < s.raw.channel_count(); ++c) {
        if (s.raw.channels[c].kind == ts::ChannelKind::Price) s.anchors.push_back(s.raw.values(row + past, c));
    }
    return s;
}

std::string ndjson(const std::vector<nlohmann::json>& lines) {
    std::string out;
    for (const auto& l : lines) out += l.dump() + "\n";
    return out;
}

}  // namespace

void synth_data(const Invocation& inv) {
    const auto& c = inv.config;
    ts::SyntheticDatasetSpec spec;
    const auto kind = c.get_string("synth.kind");
    if (kind == "sines") {
        spec.kind = ts::SyntheticKind::Sines;
    } else if (kind == "gaussian") {
        spec.kind = ts::SyntheticKind::GaussianAR;
    } else {
        throw SpecificationError("synth.kind must be sines or gaussian, got '" + kind + "'");
    }
    spec.channels = c.get_size("synth.channels");
    spec.length = c.get_size("synth.length");
    spec.phi = c.get_float("synth.phi");
    spec.sigma = c.get_float("synth.sigma");
    if (c.is_set("synth.frequencies")) spec.frequencies = c.get_floats("synth.frequencies");
    if (c.is_set("synth.phases")) spec.phases = c.get_floats("synth.phases");
    spec.seed = substream_seed(inv.seed, "data");
    spec.validate();

    const auto series = ts::generate_synthetic(spec);
    const auto out = prepare_out(inv);
    const std::string csv = ts::series_to_csv(series);
    write_file_atomic(out / "data.csv", csv);
    write_json(out / "data.json", {{"kind", kind},
                                   {"channels", spec.channels},
                                   {"length", spec.length},
                                   {"phi", spec.phi},
                                   {"sigma", spec.sigma},
                                   {"seed", inv.seed},
                                   {"checksum", nn::checksum_hex(csv)}});
    emit(inv, {{"event", "synth-data"}, {"rows", series.length()}, {"path", (out / "data.csv").string()}});
}

void ingest(const Invocation& inv) {
    const auto path = require_file(inv.config.get_string("ingest.path"), "ingest.path");
    const auto series = ts::ingest_csv(path, inv.config.get_strings("ingest.tickers"));
    const auto state = ts::fit_preprocess(series);
    const auto out = prepare_out(inv);
    ts::write_series_csv(out / "series.csv", series);
    ts::write_series_csv(out / "preprocessed.csv", ts::apply_preprocess(series, state));
    write_json(out / "preprocess.json", state.to_json());
    emit(inv, {{"event", "ingest"}, {"rows", series.length()}, {"channels", series.channel_count()}});
}

void train_gan(const Invocation& inv) {
    const auto& c = inv.config;
    const auto series = load_data(inv);
    const auto state = preprocess_state(inv, series);
    const auto data = ts::apply_preprocess(series, state);
    const auto cfg = gan_config(c, series);
    const auto pairs = ts::segment(data, cfg.generator.past, cfg.generator.future);

    gan::GanTrainConfig tc;
    tc.batch_size = c.get_size("gan.batch_size");
    tc.critic_steps = c.get_size("gan.critic_steps");
    tc.generator_steps = c.get_size("gan.steps");
    tc.eval_every = c.get_size("gan.eval_every");
    tc.holdout_fraction = c.get_float("gan.holdout_fraction");
    tc.eval_windows = c.get_size("gan.eval_windows");
    tc.seed = inv.seed;
    tc.validate();

    const auto out = prepare_out(inv);
    gan::GanModel model(cfg, inv.seed);
    std::vector<nlohmann::json> log;
    try {
        gan::train_gan(model, pairs, tc, [&](const gan::TrainLogEntry& e) {
            log.push_back(e.to_json());
            emit(inv, log.back());
        });
    } catch (...) {
        write_file_atomic(out / "gan_log.ndjson", ndjson(log));
        throw;
    }
    write_file_atomic(out / "gan_log.ndjson", ndjson(log));
    model.save(out / "gan.ckpt");
    write_json(out / "preprocess.json", state.to_json());
}

void train_diffusion(const Invocation& inv) {
    const auto& c = inv.config;
    const auto series = load_data(inv);
    const auto state = preprocess_state(inv, series);
    const auto data = ts::apply_preprocess(series, state);

    diffusion::EpsNetConfig ec;
    ec.window = c.get_size("diffusion.window");
    ec.channels = series.channel_count();
    ec.hidden = c.get_size("diffusion.hidden");
    ec.kernel = c.get_size("diffusion.kernel");
    ec.dilations = c.get_uints("diffusion.dilations");
    ec.step_embed_dim = c.get_size("diffusion.step_embed_dim");
    ec.validate();

    const auto kind = c.get_string("diffusion.schedule");
    const std::size_t t = c.get_size("diffusion.diffusion_steps");
    diffusion::NoiseSchedule schedule;
    if (kind == "scaled_linear") {
        schedule = diffusion::NoiseSchedule::scaled_linear(t);
    } else if (kind == "linear") {
        schedule = diffusion::NoiseSchedule::linear(t, c.get_float("diffusion.beta_start"),
                                                    c.get_float("diffusion.beta_end"));
    } else {
        throw SpecificationError("diffusion.schedule must be scaled_linear or linear, got '" + kind + "'");
    }

    diffusion::DiffusionTrainConfig tc;
    tc.batch_size = c.get_size("diffusion.batch_size");
    tc.train_steps = c.get_size("diffusion.steps");
    tc.log_every = c.get_size("diffusion.log_every");
    tc.seed = inv.seed;
    tc.validate();
    const std::size_t stride = c.get_size("diffusion.stride");
    if (stride == 0) throw SpecificationError("diffusion.stride must be >= 1");
    if (data.length() < ec.window) throw SpecificationError("series is shorter than diffusion.window");
    const auto windows = ts::windows(data.values, ec.window, stride);

    const auto out = prepare_out(inv);
    const nn::AdamConfig adam{c.get_float("diffusion.lr"), c.get_float("diffusion.beta1"),
                              c.get_float("diffusion.beta2")};
    diffusion::DiffusionModel model(ec, schedule, adam, inv.seed);
    std::vector<nlohmann::json> log;
    try {
        diffusion::train_diffusion(model, windows, tc, [&](const diffusion::DiffusionLogEntry& e) {
            log.push_back(e.to_json());
            emit(inv, log.back());
        });
    } catch (...) {
        write_file_atomic(out / "diffusion_log.ndjson", ndjson(log));
        throw;
    }
    write_file_atomic(out / "diffusion_log.ndjson", ndjson(log));
    model.save(out / "diffusion.ckpt");
    write_json(out / "preprocess.json", state.to_json());
}

void generate(const Invocation& inv) {
    const auto& c = inv.config;
    const auto mode = c.get_string("generate.mode");
    if (mode == "rollout") {
        auto model = load_gan(inv);
        const auto start = rollout_start(inv, model->config().generator.past);
        generation::RolloutConfig rc;
        rc.total_steps = c.get_size("generate.total_steps");
        rc.seed = inv.seed;
        rc.start_window = start.window;
        rc.start_minute = start.minute;
        const auto result = generation::rollout(*model, rc);

        ts::MultivariateSeries generated;
        generated.values = result.values;
        generated.channels = start.raw.channels;
        const auto raw = ts::invert_preprocess(generated, start.state, ts::InvertAnchor::Continuation, start.anchors);
        const auto out = prepare_out(inv);
        ts::write_series_csv(out / "generated_model.csv", generated);
        ts::write_series_csv(out / "generated.csv", raw);
        write_json(out / "generated.json", {{"mode", mode},
                                            {"seed", inv.seed},
                                            {"total_steps", rc.total_steps},
                                            {"model_calls", result.model_calls},
                                            {"start_minute", rc.start_minute},
                                            {"model_checksum", nn::checksum_hex(model->encode())}});
        emit(inv, {{"event", "generate"}, {"mode", mode}, {"rows", result.values.rows()}});
        return;
    }
    if (mode != "diffusion" && mode != "guided") {
        throw SpecificationError("generate.mode must be rollout, diffusion or guided, got '" + mode + "'");
    }

    auto model = diffusion::DiffusionModel::load(input_or(inv, "diffusion.checkpoint", inv.out / "diffusion.ckpt"));
    const std::size_t count = c.get_size("generate.count");
    if (count == 0) throw SpecificationError("generate.count must be >= 1");
    std::vector<ts::ChannelMeta> layout = ts::raw_layout(model->config().channels);
    if (!c.get_string("data.path").empty()) {
        const auto series = load_data(inv);
        if (series.channel_count() != model->config().channels) {
            throw ShapeError("generate layout", std::to_string(model->config().channels) + " channels",
                             std::to_string(series.channel_count()) + " channels");
        }
        layout = series.channels;
    }
    nlohmann::json manifest = {{"mode", mode},
                               {"seed", inv.seed},
                               {"count", count},
                               {"schedule", model->schedule().to_json()},
                               {"model_checksum", nn::checksum_hex(model->encode())}};
    const auto out = prepare_out(inv);
    if (mode == "diffusion") {
        manifest["w"] = 0.0;
        diffusion::write_sample_dump(out / "samples", diffusion::sample_unguided(*model, count, inv.seed), layout,
                                     manifest);
        emit(inv, {{"event", "generate"}, {"mode", mode}, {"windows", count}});
        return;
    }

    auto critic_model = load_gan(inv);
    diffusion::GuidanceConfig g;
    g.critic = &critic_model->critic;
    g.input = diffusion::parse_critic_input(c.get_string("generate.critic_input"));
    g.start_minute = static_cast<int>(c.get_uint("generate.start_minute"));
    const auto weights = c.get_floats("generate.w");
    if (weights.empty()) throw SpecificationError("generate.w needs at least one weight");
    manifest["critic_input"] = diffusion::critic_input_name(g.input);
    manifest["critic_checksum"] = nn::checksum_hex(critic_model->encode());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        g.w = weights[i];
        manifest["w"] = g.w;
        const fs::path dir = weights.size() == 1 ? out / "samples" : out / ("samples_w" + std::to_string(i));
        diffusion::write_sample_dump(dir, diffusion::sample_guided(*model, g, count, inv.seed), layout, manifest);
        emit(inv, {{"event", "generate"}, {"mode", mode}, {"w", g.w}, {"dir", dir.string()}});
    }
}

void evaluate(const Invocation& inv) {
    const auto& c = inv.config;
    const auto real_path = c.get_string("eval.real").empty() ? c.get_string("data.path") : c.get_string("eval.real");
    const auto real = ts::read_series_csv(require_file(real_path, "eval.real"));
    const auto synth = ts::read_series_csv(input_or(inv, "eval.synthetic", inv.out / "generated.csv"));

    eval::EvaluationConfig ec;
    ec.stylized.session_length = c.get_size("eval.session_length");
    ec.correlation = {c.get_size("eval.window"), c.get_size("eval.stride")};
    ec.include_stylized = c.get_bool("eval.stylized");
    ec.include_discriminative = c.get_bool("eval.discriminative");
    ec.discriminative_window = c.get_size("eval.discriminative_window");
    ec.discriminative.train_steps = c.get_size("eval.discriminative_steps");
    ec.discriminative.seed = substream_seed(inv.seed, "eval");

    const auto report = eval::evaluate(real, synth, ec);
    const auto out = prepare_out(inv);
    write_json(out / "report.json", report.to_json());
    if (inv.figures_data) {
        fs::create_directories(out / "figures");
        eval::write_figure_data(out / "figures", real, synth, report, ec);
    }
    emit(inv, {{"event", "evaluate"}, {"mean_cross_correlation_distance", report.mean_cross_correlation_distance}});
}

void perturb(const Invocation& inv) {
    const auto& c = inv.config;
    auto model = load_gan(inv);
    const auto start = rollout_start(inv, model->config().generator.past);

    generation::ReactivityConfig rc;
    rc.base.total_steps = c.get_size("perturb.total_steps");
    rc.base.start_window = start.window;
    rc.base.start_minute = start.minute;
    rc.target = c.get_size("perturb.target");
    rc.others = c.get_uints("perturb.others");
    rc.window_start = c.get_size("perturb.window_start");
    rc.window_end = c.get_size("perturb.window_end");
    if (const auto h = c.get_size("perturb.horizon"); h > 0) rc.response_horizon = h;
    rc.intensities = c.get_floats("perturb.intensities");
    const std::uint64_t root = substream_seed(inv.seed, "perturb");
    for (std::size_t i = 0; i < c.get_size("perturb.n_seeds"); ++i) rc.seeds.push_back(indexed_seed(root, i));
    rc.real = start.model_space.values;
    for (const auto& m : start.raw.channels) rc.channel_names.push_back(ts::channel_name(m));

    const auto entries = generation::reactivity_experiment(*model, rc);
    const auto out = prepare_out(inv);
    write_json(out / "reactivity.json", generation::reactivity_report_json(entries));
    emit(inv, {{"event", "perturb"}, {"entries", entries.size()}});
}

}  // namespace comets::cli
