#pragma once

/// \file
/// Experiment configuration: a JSON document validated at load time.
///
///   {
///     "weight":  {"family": "power_law", "nu": 1, "a": 1, "p": "inf"},
///     "signal":  {"kind": "powerdecay", "nu": 1, "seed": 3},
///     "n_values": [2, 4, 8, 16, 32],
///     "T": 1024, "S": 1024, "grid_size": 65536,
///     "noise":   {"sigma": [1e-9, 1e-6], "seeds": [1, 2, 3]},
///     "output_path": "results.csv"
///   }
///
/// signal.kind is one of bandlimited (needs "omega"), powerdecay (needs
/// "nu") or flat. noise is optional; "seed_count": N may replace "seeds" and
/// expands to 1..N. p may be a number or the string "inf".

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kernrec/format.hpp"
#include "kernrec/signals.hpp"
#include "kernrec/weights.hpp"

namespace kernrec {

/// Invalid configuration; `field()` names the offending key path.
class config_error : public std::invalid_argument {
 public:
  config_error(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class SignalKind { BandLimited, PowerDecay, Flat };

struct SignalConfig {
  SignalKind kind = SignalKind::PowerDecay;
  double omega = pi / 2;  // bandlimited
  double nu = 1.0;        // powerdecay
  std::uint64_t seed = 1;

  bool operator==(const SignalConfig&) const = default;
};

struct NoiseConfig {
  std::vector<double> sigmas;
  std::vector<std::uint64_t> seeds;

  bool operator==(const NoiseConfig&) const = default;
};

struct ExperimentConfig {
  WeightSpec weight;
  SignalConfig signal;
  std::vector<int> n_values{2, 4, 8};
  int T = 1024;
  int S = 1024;
  int grid_size = 65536;
  std::optional<NoiseConfig> noise;
  std::string output_path = "results.csv";

  bool operator==(const ExperimentConfig&) const = default;
};

inline std::string_view to_string(SignalKind k) {
  switch (k) {
    case SignalKind::BandLimited:
      return "bandlimited";
    case SignalKind::PowerDecay:
      return "powerdecay";
    case SignalKind::Flat:
      return "flat";
  }
  return "?";
}

inline SpectralSignal make_signal(const SignalConfig& sc, int grid_size) {
  switch (sc.kind) {
    case SignalKind::BandLimited:
      return make_bandlimited(sc.omega, sc.seed, grid_size);
    case SignalKind::PowerDecay:
      return make_power_decay(sc.nu, sc.seed, grid_size);
    case SignalKind::Flat:
      return make_flat(sc.seed, grid_size);
  }
  throw std::invalid_argument("unknown signal kind");
}

// ---------------------------------------------------------------------------
// JSON

using json = nlohmann::json;

namespace detail {

inline const json& require(const json& obj, const std::string& key,
                           const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw config_error(path + key, "missing required field");
  }
  return obj.at(key);
}

inline double as_number(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return infinity;
  }
  throw config_error(path, "expected a number");
}

inline long long as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw config_error(path, "expected an integer");
  return v.get<long long>();
}

inline int as_int(const json& v, const std::string& path) {
  const long long x = as_integer(v, path);
  if (x < -2147483647LL || x > 2147483647LL) {
    throw config_error(path, "integer out of range");
  }
  return static_cast<int>(x);
}

inline std::uint64_t as_seed(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(v.get<long long>());
  }
  throw config_error(path, "expected a non-negative integer seed");
}

inline json number_to_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

}  // namespace detail

inline json to_json(const WeightSpec& w) {
  return json{{"family", std::string(to_string(w.family()))},
              {"nu", w.nu()},
              {"a", w.a()},
              {"p", detail::number_to_json(w.p())}};
}

inline json to_json(const ExperimentConfig& c) {
  json sig{{"kind", std::string(to_string(c.signal.kind))},
           {"seed", c.signal.seed}};
  if (c.signal.kind == SignalKind::BandLimited) sig["omega"] = c.signal.omega;
  if (c.signal.kind == SignalKind::PowerDecay) sig["nu"] = c.signal.nu;
  json j{{"weight", to_json(c.weight)},
         {"signal", sig},
         {"n_values", c.n_values},
         {"T", c.T},
         {"S", c.S},
         {"grid_size", c.grid_size},
         {"output_path", c.output_path}};
  if (c.noise) {
    json sigmas = json::array();
    for (double s : c.noise->sigmas) sigmas.push_back(s);
    j["noise"] = json{{"sigma", sigmas}, {"seeds", c.noise->seeds}};
  }
  return j;
}

/// Canonical single-line text (sorted keys).
inline std::string serialize_config(const ExperimentConfig& c) {
  return to_json(c).dump();
}

/// Parses and validates; every failure is a config_error naming its field.
inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw config_error("<root>", "expected a JSON object");
  ExperimentConfig c;

  {
    const json& w = detail::require(j, "weight", "");
    const json& fam = detail::require(w, "family", "weight.");
    if (!fam.is_string()) throw config_error("weight.family", "expected a string");
    WeightFamily family;
    try {
      family = weight_family_from_string(fam.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw config_error("weight.family", e.what());
    }
    const double nu = detail::as_number(detail::require(w, "nu", "weight."), "weight.nu");
    const double a = w.contains("a") ? detail::as_number(w.at("a"), "weight.a") : 1.0;
    const double p = w.contains("p") ? detail::as_number(w.at("p"), "weight.p")
                                     : infinity;
    try {
      c.weight = make_weight(family, nu, a, p);
    } catch (const std::invalid_argument& e) {
      std::string field = "weight";
      const std::string msg = e.what();
      if (msg.find(" p ") != std::string::npos) {
        field = "weight.p";
      } else if (msg.find(" nu ") != std::string::npos) {
        field = "weight.nu";
      } else if (msg.find(" a ") != std::string::npos) {
        field = "weight.a";
      }
      throw config_error(field, msg);
    }
  }

  {
    const json& s = detail::require(j, "signal", "");
    const json& kind = detail::require(s, "kind", "signal.");
    if (!kind.is_string()) throw config_error("signal.kind", "expected a string");
    const auto k = kind.get<std::string>();
    if (k == "bandlimited") {
      c.signal.kind = SignalKind::BandLimited;
      c.signal.omega = detail::as_number(detail::require(s, "omega", "signal."),
                                         "signal.omega");
      if (!(c.signal.omega > 0.0 && c.signal.omega < pi)) {
        throw config_error("signal.omega", "Omega must lie in (0, pi)");
      }
    } else if (k == "powerdecay") {
      c.signal.kind = SignalKind::PowerDecay;
      c.signal.nu = detail::as_number(detail::require(s, "nu", "signal."), "signal.nu");
      if (!(c.signal.nu > 0.0) || !std::isfinite(c.signal.nu)) {
        throw config_error("signal.nu", "nu must be positive and finite");
      }
    } else if (k == "flat") {
      c.signal.kind = SignalKind::Flat;
    } else {
      throw config_error("signal.kind",
                         "unknown kind '" + k + "' (expected bandlimited, powerdecay, flat)");
    }
    c.signal.seed = s.contains("seed") ? detail::as_seed(s.at("seed"), "signal.seed") : 1;
  }

  {
    const json& nv = detail::require(j, "n_values", "");
    if (!nv.is_array() || nv.empty()) {
      throw config_error("n_values", "expected a non-empty array of integers");
    }
    c.n_values.clear();
    for (std::size_t i = 0; i < nv.size(); ++i) {
      const std::string path = "n_values[" + std::to_string(i) + "]";
      const int n = detail::as_int(nv[i], path);
      if (n < 2) throw config_error(path, "n must be >= 2");
      if (!c.n_values.empty() && n <= c.n_values.back()) {
        throw config_error(path, "n_values must be strictly ascending");
      }
      c.n_values.push_back(n);
    }
  }

  c.T = j.contains("T") ? detail::as_int(j.at("T"), "T") : c.T;
  c.S = j.contains("S") ? detail::as_int(j.at("S"), "S") : c.S;
  c.grid_size = j.contains("grid_size") ? detail::as_int(j.at("grid_size"), "grid_size")
                                        : c.grid_size;
  if (c.T < 1) throw config_error("T", "T must be >= 1");
  if (c.S < c.T) throw config_error("S", "S must be >= T");
  if (c.grid_size < 1024 || (c.grid_size & (c.grid_size - 1)) != 0) {
    throw config_error("grid_size", "grid_size must be a power of two >= 1024");
  }
  if (static_cast<long long>(c.grid_size) < 8LL * (4LL * c.S + 1)) {
    throw config_error("grid_size",
                       "grid_size must be >= 8 (4S + 1) = " +
                           std::to_string(8LL * (4LL * c.S + 1)) +
                           " so that the (2T, 2S) truncation check fits the grid");
  }

  if (j.contains("noise") && !j.at("noise").is_null()) {
    const json& nz = j.at("noise");
    NoiseConfig noise;
    const json& sg = detail::require(nz, "sigma", "noise.");
    if (sg.is_array()) {
      for (std::size_t i = 0; i < sg.size(); ++i) {
        noise.sigmas.push_back(
            detail::as_number(sg[i], "noise.sigma[" + std::to_string(i) + "]"));
      }
    } else {
      noise.sigmas.push_back(detail::as_number(sg, "noise.sigma"));
    }
    if (noise.sigmas.empty()) throw config_error("noise.sigma", "need at least one sigma");
    for (double s : noise.sigmas) {
      if (!(s >= 0.0) || !std::isfinite(s)) {
        throw config_error("noise.sigma", "sigma must be finite and >= 0");
      }
    }
    if (nz.contains("seeds")) {
      const json& sd = nz.at("seeds");
      if (!sd.is_array()) throw config_error("noise.seeds", "expected an array");
      for (std::size_t i = 0; i < sd.size(); ++i) {
        noise.seeds.push_back(
            detail::as_seed(sd[i], "noise.seeds[" + std::to_string(i) + "]"));
      }
    } else if (nz.contains("seed_count")) {
      const long long n = detail::as_integer(nz.at("seed_count"), "noise.seed_count");
      if (n < 1 || n > 1000000) {
        throw config_error("noise.seed_count", "seed_count must be in [1, 1e6]");
      }
      for (long long i = 1; i <= n; ++i) noise.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    if (noise.seeds.empty()) {
      throw config_error("noise.seeds", "need at least one noise seed");
    }
    c.noise = std::move(noise);
  }

  if (j.contains("output_path")) {
    if (!j.at("output_path").is_string()) {
      throw config_error("output_path", "expected a string");
    }
    c.output_path = j.at("output_path").get<std::string>();
  }
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error("<root>", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("<file>", "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace kernrec
