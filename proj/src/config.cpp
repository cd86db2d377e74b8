#include "fnirs/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "text_util.hpp"

namespace fnirs {

namespace {

struct Entry {
  const char* name;
  const char* help;
  std::function<void(CliConfig&, std::string_view)> set;
  std::function<std::string(const CliConfig&)> get;
};

double as_double(std::string_view key, std::string_view v) {
  const auto d = text::parse_double(v);
  if (!d) throw ConfigError("key '" + std::string(key) + "': expected a number, got '" + std::string(v) + "'");
  return *d;
}

std::uint64_t as_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw ConfigError("key '" + std::string(key) + "': expected a nonnegative integer, got '" + std::string(v) + "'");
  return out;
}

bool as_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + std::string(key) + "': expected true/false, got '" + std::string(v) + "'");
}

std::string join(const auto& values, auto&& fmt) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ',';
    out += fmt(v);
  }
  return out;
}

std::string num(double v) { return text::shortest(v); }

#define DOUBLE_KEY(key, field, doc)                                                          \
  Entry {                                                                                    \
    key, doc, [](CliConfig& c, std::string_view v) { c.field = as_double(key, v); },         \
        [](const CliConfig& c) { return num(c.field); }                                      \
  }
#define SIZE_KEY(key, field, doc)                                                            \
  Entry {                                                                                    \
    key, doc, [](CliConfig& c, std::string_view v) { c.field = static_cast<std::size_t>(as_u64(key, v)); }, \
        [](const CliConfig& c) { return std::to_string(c.field); }                           \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back({"seed", "root seed for data generation, splits, init and dropout",
                 [](CliConfig& c, std::string_view v) { c.seed = as_u64("seed", v); },
                 [](const CliConfig& c) { return std::to_string(c.seed); }});
    // synthetic data
    t.push_back(SIZE_KEY("n_subjects", synth.n_subjects, "synthetic subjects"));
    t.push_back(SIZE_KEY("trials_per_class", synth.trials_per_class, "trials per pain class per subject"));
    t.push_back(DOUBLE_KEY("trial_seconds", synth.trial_seconds, "length of one trial recording in seconds"));
    t.push_back(DOUBLE_KEY("amp_low_cold", synth.response_amplitudes[0], "peak HbO response, low_cold"));
    t.push_back(DOUBLE_KEY("amp_low_heat", synth.response_amplitudes[1], "peak HbO response, low_heat"));
    t.push_back(DOUBLE_KEY("amp_high_cold", synth.response_amplitudes[2], "peak HbO response, high_cold"));
    t.push_back(DOUBLE_KEY("amp_high_heat", synth.response_amplitudes[3], "peak HbO response, high_heat"));
    t.push_back(DOUBLE_KEY("heat_gain", synth.heat_gain, "response gain on channels 1-12 for heat stimuli"));
    t.push_back(DOUBLE_KEY("pink_sd", synth.noise.pink_sd, "standard deviation of 1/f noise"));
    t.push_back(DOUBLE_KEY("mayer_amp", synth.noise.mayer_amp, "amplitude of the 0.1 Hz Mayer wave"));
    t.push_back(DOUBLE_KEY("resp_amp", synth.noise.resp_amp, "amplitude of the 0.3 Hz respiratory component"));
    t.push_back(DOUBLE_KEY("cardiac_amp", synth.noise.cardiac_amp, "amplitude of the 1.2 Hz cardiac component"));
    t.push_back(DOUBLE_KEY("drift_slope", synth.noise.drift_slope, "max |linear drift| per second"));
    t.push_back({"channel_gains", "24 comma-separated channel gains, or one value for all",
                 [](CliConfig& c, std::string_view v) {
                   const auto cells = text::split(v, ',');
                   if (cells.size() == 1) {
                     c.synth.channel_gains.fill(as_double("channel_gains", cells[0]));
                   } else if (cells.size() == kChannels) {
                     for (std::size_t i = 0; i < kChannels; ++i)
                       c.synth.channel_gains[i] = as_double("channel_gains", cells[i]);
                   } else {
                     throw ConfigError("key 'channel_gains': expected 1 or 24 values, got " +
                                       std::to_string(cells.size()));
                   }
                 },
                 [](const CliConfig& c) { return join(c.synth.channel_gains, num); }});
    // windowing
    t.push_back(SIZE_KEY("window", window, "samples per window"));
    t.push_back(DOUBLE_KEY("overlap", overlap, "fractional overlap of consecutive windows"));
    t.push_back({"standardize", "z-score each channel per recording before windowing",
                 [](CliConfig& c, std::string_view v) { c.standardize = as_bool("standardize", v); },
                 [](const CliConfig& c) { return std::string(c.standardize ? "true" : "false"); }});
    // model
    t.push_back({"layer_widths", "hidden widths, comma-separated",
                 [](CliConfig& c, std::string_view v) {
                   c.model.layer_widths.clear();
                   for (auto cell : text::split(v, ','))
                     c.model.layer_widths.push_back(static_cast<std::size_t>(as_u64("layer_widths", cell)));
                 },
                 [](const CliConfig& c) {
                   return join(c.model.layer_widths, [](std::size_t w) { return std::to_string(w); });
                 }});
    t.push_back(DOUBLE_KEY("dropout_rate", model.dropout_rate, "dropout before the output layer"));
    // training
    t.push_back(SIZE_KEY("max_epochs", train.max_epochs, "epoch cap per fold"));
    t.push_back(SIZE_KEY("patience", train.patience, "epochs without val-loss decrease before stopping"));
    t.push_back(SIZE_KEY("batch_size", train.batch_size, "minibatch size"));
    t.push_back({"n_folds", "cross-validation folds over the train split",
                 [](CliConfig& c, std::string_view v) { c.train.n_folds = static_cast<int>(as_u64("n_folds", v)); },
                 [](const CliConfig& c) { return std::to_string(c.train.n_folds); }});
    t.push_back(DOUBLE_KEY("train_fraction", train.train_fraction, "share of windows in the train split"));
    t.push_back(DOUBLE_KEY("learning_rate", train.learning_rate, "Adam step size"));
    return t;
  }();
  return table;
}

#undef DOUBLE_KEY
#undef SIZE_KEY

}  // namespace

std::vector<ConfigKeyInfo> config_keys() {
  const CliConfig defaults;
  std::vector<ConfigKeyInfo> out;
  for (const auto& e : entries()) out.push_back({e.name, e.help, e.get(defaults)});
  return out;
}

void apply_setting(CliConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& e : entries())
    if (key == e.name) {
      e.set(cfg, value);
      return;
    }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

CliConfig parse_config(std::string_view text, std::string_view origin) {
  CliConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected 'key = value'");
    try {
      apply_setting(cfg, text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.synth.seed = cfg.seed;
  cfg.train.seed = cfg.seed;
  return cfg;
}

CliConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string render_config(const CliConfig& cfg) {
  std::string out;
  for (const auto& e : entries()) out += std::string(e.name) + " = " + e.get(cfg) + "\n";
  return out;
}

std::string config_help() {
  std::string out = "Config keys (key = value, # comments):\n";
  for (const auto& k : config_keys()) {
    std::string line = "  " + k.name;
    line.resize(std::max<std::size_t>(line.size() + 1, 20), ' ');
    out += line + k.help + " [default: " + k.default_value + "]\n";
  }
  return out;
}

}  // namespace fnirs
