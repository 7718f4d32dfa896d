#include "bat/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bat::harness {
namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("config: bad value '" + value + "' for key '" + key + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (used != value.size()) bad_value(key, value);
  return out;
}

long long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (used != value.size()) bad_value(key, value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct KeyEntry {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

const std::vector<KeyEntry>& key_table() {
  static const std::vector<KeyEntry> table = [] {
    std::vector<KeyEntry> t;
    auto add_double = [&](const char* name, double RunConfig::* field) {
      t.push_back({name,
                   [name, field](RunConfig& c, const std::string& v) {
                     c.*field = parse_double(name, v);
                   },
                   [field](const RunConfig& c) { return fmt(c.*field); }});
    };
    auto add_model_double = [&](const char* name, double model::BatConfig::* field) {
      t.push_back({name,
                   [name, field](RunConfig& c, const std::string& v) {
                     c.model.*field = parse_double(name, v);
                   },
                   [field](const RunConfig& c) { return fmt(c.model.*field); }});
    };
    auto add_model_int = [&](const char* name, int model::BatConfig::* field) {
      t.push_back({name,
                   [name, field](RunConfig& c, const std::string& v) {
                     c.model.*field = static_cast<int>(parse_int(name, v));
                   },
                   [field](const RunConfig& c) { return std::to_string(c.model.*field); }});
    };
    auto add_model_bool = [&](const char* name, bool model::BatConfig::* field) {
      t.push_back({name,
                   [name, field](RunConfig& c, const std::string& v) {
                     c.model.*field = parse_bool(name, v);
                   },
                   [field](const RunConfig& c) {
                     return std::string(c.model.*field ? "true" : "false");
                   }});
    };
    auto add_int = [&](const char* name, int RunConfig::* field) {
      t.push_back({name,
                   [name, field](RunConfig& c, const std::string& v) {
                     c.*field = static_cast<int>(parse_int(name, v));
                   },
                   [field](const RunConfig& c) { return std::to_string(c.*field); }});
    };
    auto add_string = [&](const char* name, std::string RunConfig::* field) {
      t.push_back({name,
                   [field](RunConfig& c, const std::string& v) { c.*field = v; },
                   [field](const RunConfig& c) { return c.*field; }});
    };

    add_model_int("behavior_dim", &model::BatConfig::behavior_dim);
    add_model_int("interaction_dim", &model::BatConfig::interaction_dim);
    add_model_int("position_dim", &model::BatConfig::position_dim);
    add_model_int("decoder_dim", &model::BatConfig::decoder_dim);
    add_model_int("embed_dim", &model::BatConfig::embed_dim);
    add_model_int("priority_hidden", &model::BatConfig::priority_hidden);
    add_model_int("encoding_dim", &model::BatConfig::encoding_dim);
    add_model_double("r", &model::BatConfig::r);
    add_model_double("t_h", &model::BatConfig::t_h);
    add_model_double("t_f", &model::BatConfig::t_f);
    add_model_double("dt", &model::BatConfig::dt);
    add_model_bool("cartesian_input", &model::BatConfig::cartesian_input);
    add_model_bool("use_behavior", &model::BatConfig::use_behavior);
    add_model_bool("use_interaction", &model::BatConfig::use_interaction);
    add_model_bool("use_priority", &model::BatConfig::use_priority);

    t.push_back({"alpha_rmse",
                 [](RunConfig& c, const std::string& v) {
                   c.loss.alpha_rmse = parse_double("alpha_rmse", v);
                 },
                 [](const RunConfig& c) { return fmt(c.loss.alpha_rmse); }});
    t.push_back({"beta_ce",
                 [](RunConfig& c, const std::string& v) {
                   c.loss.beta_ce = parse_double("beta_ce", v);
                 },
                 [](const RunConfig& c) { return fmt(c.loss.beta_ce); }});
    t.push_back({"lr",
                 [](RunConfig& c, const std::string& v) {
                   c.adam.lr = parse_double("lr", v);
                 },
                 [](const RunConfig& c) { return fmt(c.adam.lr); }});
    t.push_back({"adam_beta1",
                 [](RunConfig& c, const std::string& v) {
                   c.adam.beta1 = parse_double("adam_beta1", v);
                 },
                 [](const RunConfig& c) { return fmt(c.adam.beta1); }});
    t.push_back({"adam_beta2",
                 [](RunConfig& c, const std::string& v) {
                   c.adam.beta2 = parse_double("adam_beta2", v);
                 },
                 [](const RunConfig& c) { return fmt(c.adam.beta2); }});
    t.push_back({"adam_eps",
                 [](RunConfig& c, const std::string& v) {
                   c.adam.eps = parse_double("adam_eps", v);
                 },
                 [](const RunConfig& c) { return fmt(c.adam.eps); }});

    add_int("epochs", &RunConfig::epochs);
    add_int("batch_size", &RunConfig::batch_size);
    add_int("t_0", &RunConfig::t_0);
    add_int("t_mult", &RunConfig::t_mult);
    add_int("val_every", &RunConfig::val_every);
    add_int("threads", &RunConfig::threads);
    t.push_back({"seed",
                 [](RunConfig& c, const std::string& v) {
                   c.seed = static_cast<unsigned long long>(parse_int("seed", v));
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});

    add_string("dataset", &RunConfig::dataset);
    add_string("synth_kind", &RunConfig::synth_kind);
    add_int("synth_scenes", &RunConfig::synth_scenes);
    add_double("synth_noise", &RunConfig::synth_noise);
    t.push_back({"train_frac",
                 [](RunConfig& c, const std::string& v) {
                   c.fractions[0] = parse_double("train_frac", v);
                 },
                 [](const RunConfig& c) { return fmt(c.fractions[0]); }});
    t.push_back({"val_frac",
                 [](RunConfig& c, const std::string& v) {
                   c.fractions[1] = parse_double("val_frac", v);
                 },
                 [](const RunConfig& c) { return fmt(c.fractions[1]); }});
    t.push_back({"test_frac",
                 [](RunConfig& c, const std::string& v) {
                   c.fractions[2] = parse_double("test_frac", v);
                 },
                 [](const RunConfig& c) { return fmt(c.fractions[2]); }});
    add_string("split_mode", &RunConfig::split_mode);
    add_double("subsample", &RunConfig::subsample);
    add_string("rmse_mode", &RunConfig::rmse_mode);
    return t;
  }();
  return table;
}

}  // namespace

void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value) {
  for (const KeyEntry& entry : key_table()) {
    if (key == entry.name) {
      entry.set(config, value);
      return;
    }
  }
  throw std::invalid_argument("config: unknown key '" + key + "'");
}

void load_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    apply_config_entry(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string serialize_config(const RunConfig& config) {
  std::ostringstream out;
  for (const KeyEntry& entry : key_table())
    out << entry.name << '=' << entry.get(config) << '\n';
  return out.str();
}

}  // namespace bat::harness
