#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "comets/error.hpp"
#include "comets/io.hpp"

namespace comets::cli {
namespace {

using T = ValueType;

const std::vector<KeySpec> kSchema = {
    {"seed", T::UInt, "0", "root seed; every random stream is derived from it"},
    {"out", T::String, "out", "output directory"},

    {"data.path", T::String, "", "series CSV (raw prices/volumes or raw channels) used for training and rollouts"},
    {"preprocess.path", T::String, "", "saved preprocessing state; refitted on data.path when empty"},

    {"synth.kind", T::String, "sines", "sines | gaussian"},
    {"synth.channels", T::UInt, "5", "channel count"},
    {"synth.length", T::UInt, "2000", "rows"},
    {"synth.phi", T::Float, "0.8", "gaussian: AR coefficient"},
    {"synth.sigma", T::Float, "0.8", "gaussian: cross-channel noise correlation"},
    {"synth.frequencies", T::FloatList, "", "sines: explicit frequencies (one per channel)"},
    {"synth.phases", T::FloatList, "", "sines: explicit phases (one per channel)"},

    {"ingest.path", T::String, "", "market-data CSV: timestamp,<TICK>_mid,<TICK>_vol,..."},
    {"ingest.tickers", T::StringList, "", "expected ticker order; header order when empty"},

    {"gan.past", T::UInt, "24", "conditioning window P"},
    {"gan.future", T::UInt, "24", "generated window F"},
    {"gan.hidden", T::UInt, "64", "generator hidden width"},
    {"gan.kernel", T::UInt, "3", "generator kernel size"},
    {"gan.dilations", T::UIntList, "1,2,4,8,16,32,64", "generator block dilations (7 blocks)"},
    {"gan.time_embed_dim", T::UInt, "32", "time-of-day embedding width"},
    {"gan.dropout", T::Float, "0.1", "generator dropout"},
    {"gan.critic_conv", T::UIntList, "32,64,128,256", "critic conv channels"},
    {"gan.critic_kernel", T::UInt, "5", "critic kernel size"},
    {"gan.critic_stride", T::UInt, "2", "critic conv stride"},
    {"gan.critic_linear", T::UIntList, "256,128,1", "critic dense widths (last must be 1)"},
    {"gan.alpha", T::Float, "1.0", "weight of the correlation head"},
    {"gan.lr_g", T::Float, "1e-4", "generator learning rate"},
    {"gan.lr_d", T::Float, "1e-4", "critic learning rate"},
    {"gan.beta1", T::Float, "0.5", "Adam beta1 (both networks)"},
    {"gan.beta2", T::Float, "0.9", "Adam beta2 (both networks)"},
    {"gan.batch_size", T::UInt, "64", "training batch"},
    {"gan.critic_steps", T::UInt, "5", "critic updates per generator update"},
    {"gan.steps", T::UInt, "1000", "generator updates"},
    {"gan.eval_every", T::UInt, "50", "held-out evaluation cadence (generator steps)"},
    {"gan.holdout_fraction", T::Float, "0.1", "trailing fraction of pairs held out"},
    {"gan.eval_windows", T::UInt, "256", "held-out pairs per evaluation"},
    {"gan.checkpoint", T::String, "", "GAN checkpoint to read; <out>/gan.ckpt when empty"},

    {"diffusion.window", T::UInt, "24", "window length"},
    {"diffusion.stride", T::UInt, "1", "stride between training windows"},
    {"diffusion.hidden", T::UInt, "64", "noise network width"},
    {"diffusion.kernel", T::UInt, "3", "noise network kernel size"},
    {"diffusion.dilations", T::UIntList, "1,2,4,8", "noise network block dilations"},
    {"diffusion.step_embed_dim", T::UInt, "32", "diffusion-step embedding width"},
    {"diffusion.schedule", T::String, "scaled_linear", "scaled_linear | linear"},
    {"diffusion.diffusion_steps", T::UInt, "100", "number of noise levels T"},
    {"diffusion.beta_start", T::Float, "1e-4", "linear schedule only"},
    {"diffusion.beta_end", T::Float, "0.02", "linear schedule only"},
    {"diffusion.lr", T::Float, "1e-3", "learning rate"},
    {"diffusion.beta1", T::Float, "0.9", "Adam beta1"},
    {"diffusion.beta2", T::Float, "0.999", "Adam beta2"},
    {"diffusion.batch_size", T::UInt, "64", "training batch"},
    {"diffusion.steps", T::UInt, "2000", "optimiser steps"},
    {"diffusion.log_every", T::UInt, "50", "log cadence"},
    {"diffusion.checkpoint", T::String, "", "diffusion checkpoint to read; <out>/diffusion.ckpt when empty"},

    {"generate.mode", T::String, "rollout", "rollout | diffusion | guided"},
    {"generate.total_steps", T::UInt, "9360", "rollout length in rows"},
    {"generate.start_row", T::UInt, "0", "first row of the conditioning window (preprocessed rows)"},
    {"generate.count", T::UInt, "64", "diffusion windows to sample"},
    {"generate.w", T::FloatList, "0", "guidance weights; several values write one dump each"},
    {"generate.critic_input", T::String, "zero_past", "zero_past | unconditional"},
    {"generate.start_minute", T::UInt, "0", "minute of day of the zero conditioning window"},

    {"eval.real", T::String, "", "real series CSV; data.path when empty"},
    {"eval.synthetic", T::String, "", "synthetic series CSV; <out>/generated.csv when empty"},
    {"eval.window", T::UInt, "390", "rolling correlation window"},
    {"eval.stride", T::UInt, "390", "rolling correlation stride"},
    {"eval.stylized", T::Bool, "true", "compute stylized facts"},
    {"eval.session_length", T::UInt, "390", "rows per day when timestamps are absent"},
    {"eval.discriminative", T::Bool, "true", "train the real-vs-synthetic classifier"},
    {"eval.discriminative_window", T::UInt, "150", "classifier window length"},
    {"eval.discriminative_steps", T::UInt, "500", "classifier training steps"},

    {"perturb.target", T::UInt, "0", "perturbed channel"},
    {"perturb.others", T::UIntList, "", "compared channels; all others when empty"},
    {"perturb.window_start", T::UInt, "100", "first perturbed generated row"},
    {"perturb.window_end", T::UInt, "150", "one past the last perturbed row"},
    {"perturb.horizon", T::UInt, "0", "response rows after the window; F when 0"},
    {"perturb.intensities", T::FloatList, "0,1,2,3", "shock sizes in standard deviations"},
    {"perturb.n_seeds", T::UInt, "10", "rollout seeds per intensity"},
    {"perturb.total_steps", T::UInt, "390", "rollout length"},
};

const KeySpec& find_key(const std::string& key) {
    const auto it = std::find_if(kSchema.begin(), kSchema.end(), [&](const KeySpec& s) { return s.key == key; });
    if (it == kSchema.end()) throw SpecificationError("unknown config key '" + key + "'");
    return *it;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    if (trim(value).empty()) return out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        throw SpecificationError("config key '" + key + "': expected a non-negative integer, got '" + text + "'");
    }
    errno = 0;
    const auto v = std::strtoull(text.c_str(), nullptr, 10);
    if (errno == ERANGE) throw SpecificationError("config key '" + key + "': '" + text + "' is out of range");
    return v;
}

double parse_float(const std::string& key, const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
        throw SpecificationError("config key '" + key + "': expected a finite number, got '" + text + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw SpecificationError("config key '" + key + "': expected true or false, got '" + text + "'");
}

void check_value(const KeySpec& spec, const std::string& value) {
    const std::string key(spec.key);
    switch (spec.type) {
        case T::UInt: parse_uint(key, value); break;
        case T::Float: parse_float(key, value); break;
        case T::Bool: parse_bool(key, value); break;
        case T::String:
        case T::StringList: break;
        case T::UIntList:
            for (const auto& v : split_list(value)) parse_uint(key, v);
            break;
        case T::FloatList:
            for (const auto& v : split_list(value)) parse_float(key, v);
            break;
    }
}

std::string_view type_name(ValueType t) {
    switch (t) {
        case T::UInt: return "uint";
        case T::Float: return "float";
        case T::Bool: return "bool";
        case T::String: return "string";
        case T::UIntList: return "uint list";
        case T::FloatList: return "float list";
        case T::StringList: return "string list";
    }
    return "?";
}

}  // namespace

const std::vector<KeySpec>& schema() { return kSchema; }

std::string schema_markdown() {
    auto cell = [](std::string_view text) {
        std::string c;
        for (char ch : text) {
            if (ch == '|') c += '\\';
            c += ch;
        }
        return c;
    };
    std::string out = "| key | type | default | meaning |\n|---|---|---|---|\n";
    for (const auto& s : kSchema) {
        const std::string def = s.default_value.empty() ? " " : "`" + std::string(s.default_value) + "`";
        out += "| `" + std::string(s.key) + "` | " + std::string(type_name(s.type)) + " | " + def + " | " +
               cell(s.help) + " |\n";
    }
    return out;
}

RunConfig RunConfig::parse(std::string_view text, const std::string& origin) {
    RunConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string line(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(line_no);
        if (eq == std::string::npos) throw SpecificationError(where + ": expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (cfg.is_set(key)) throw SpecificationError(where + ": duplicate key '" + key + "'");
        try {
            cfg.set(key, value);
        } catch (const SpecificationError& e) {
            throw SpecificationError(where + ": " + e.what());
        }
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw SpecificationError("config file not found: " + path.string());
    return parse(read_file(path), path.string());
}

void RunConfig::set(const std::string& key, const std::string& value) {
    check_value(find_key(key), value);
    values_[key] = value;
}

std::string RunConfig::raw(const std::string& key, ValueType expected) const {
    const KeySpec& spec = find_key(key);
    if (spec.type != expected) throw std::logic_error("config key " + key + " read with the wrong type");
    const auto it = values_.find(key);
    return it != values_.end() ? it->second : std::string(spec.default_value);
}

std::uint64_t RunConfig::get_uint(const std::string& key) const { return parse_uint(key, raw(key, T::UInt)); }
double RunConfig::get_float(const std::string& key) const { return parse_float(key, raw(key, T::Float)); }
bool RunConfig::get_bool(const std::string& key) const { return parse_bool(key, raw(key, T::Bool)); }
std::string RunConfig::get_string(const std::string& key) const { return raw(key, T::String); }

std::vector<std::size_t> RunConfig::get_uints(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const auto& v : split_list(raw(key, T::UIntList))) out.push_back(static_cast<std::size_t>(parse_uint(key, v)));
    return out;
}

std::vector<double> RunConfig::get_floats(const std::string& key) const {
    std::vector<double> out;
    for (const auto& v : split_list(raw(key, T::FloatList))) out.push_back(parse_float(key, v));
    return out;
}

std::vector<std::string> RunConfig::get_strings(const std::string& key) const {
    return split_list(raw(key, T::StringList));
}

nlohmann::json RunConfig::resolved() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& s : kSchema) {
        const std::string key(s.key);
        switch (s.type) {
            case T::UInt: j[key] = get_uint(key); break;
            case T::Float: j[key] = get_float(key); break;
            case T::Bool: j[key] = get_bool(key); break;
            case T::String: j[key] = get_string(key); break;
            case T::UIntList: j[key] = get_uints(key); break;
            case T::FloatList: j[key] = get_floats(key); break;
            case T::StringList: j[key] = get_strings(key); break;
        }
    }
    return j;
}

}  // namespace comets::cli
