#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

#include "pcpkit/dinur.hpp"
#include "pcpkit/errors.hpp"

namespace pcpkit {

namespace {

bool is_square(unsigned t) {
  unsigned r = static_cast<unsigned>(std::lround(std::sqrt(static_cast<double>(t))));
  return r * r == t;
}

}  // namespace

void PipelineConfig::validate() const {
  if (t < 1 || !is_square(t)) throw ParameterError("t must be a perfect square >= 1");
  if (l < 2) throw ParameterError("l must be at least 2");
  if (q0 < 3) throw ParameterError("q0 must be at least 3");
  if (epsilon0.sign() <= 0 || epsilon0 >= Rat(1)) throw ParameterError("epsilon0 must lie in (0,1)");
  if (cloud_degree < 1) throw ParameterError("cloud degree must be positive");
  if (d < cloud_degree + 1) throw ParameterError("d must be at least the regularized degree cloud_degree + 1");
  if (cloud_base < 1 || pad_base < 1) throw ParameterError("size bases must be positive");
  if (W < 2) throw ParameterError("alphabet cap must be at least 2");
  if (m0 < 1 || tester_repetitions < 1 || b < 1 || L < 1) throw ParameterError("counts must be positive");
  if (cloud_lambda.sign() < 0 || cloud_lambda >= Rat(1)) throw ParameterError("cloud lambda must lie in [0,1)");
  if (nice_lambda.sign() < 0 || nice_lambda > Rat(9) / Rat(10)) throw ParameterError("nice lambda must lie in [0,9/10]");
  if (val_budget == 0 || path_budget == 0 || tableau_budget == 0 || expander_attempts == 0 || spectral_exact_cap == 0)
    throw ParameterError("budgets must be positive");
}

SpectralOptions PipelineConfig::spectral() const {
  SpectralOptions opt;
  opt.exact_cap = spectral_exact_cap;
  opt.seed = seed;
  return opt;
}

namespace {

struct Field {
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

template <typename T>
Field uint_field(T PipelineConfig::*member) {
  return {[member](const PipelineConfig& c) { return std::to_string(c.*member); },
          [member](PipelineConfig& c, const std::string& v) {
            std::size_t pos = 0;
            unsigned long long x = 0;
            try {
              x = std::stoull(v, &pos);
            } catch (const std::exception&) {
              throw ParseError("expected an unsigned integer, got '" + v + "'");
            }
            if (pos != v.size() || v.front() == '-') throw ParseError("expected an unsigned integer, got '" + v + "'");
            c.*member = static_cast<T>(x);
            if (static_cast<unsigned long long>(c.*member) != x) throw ParseError("value out of range: " + v);
          }};
}

Field rat_field(Rat PipelineConfig::*member) {
  return {[member](const PipelineConfig& c) { return (c.*member).str(); },
          [member](PipelineConfig& c, const std::string& v) {
            try {
              c.*member = Rat::parse(v);
            } catch (const Error&) {
              throw ParseError("bad rational '" + v + "'");
            }
          }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> f = {
      {"q0", uint_field(&PipelineConfig::q0)},
      {"l", uint_field(&PipelineConfig::l)},
      {"t", uint_field(&PipelineConfig::t)},
      {"cloud_degree", uint_field(&PipelineConfig::cloud_degree)},
      {"d", uint_field(&PipelineConfig::d)},
      {"cloud_base", uint_field(&PipelineConfig::cloud_base)},
      {"pad_base", uint_field(&PipelineConfig::pad_base)},
      {"cloud_lambda", rat_field(&PipelineConfig::cloud_lambda)},
      {"nice_lambda", rat_field(&PipelineConfig::nice_lambda)},
      {"W", uint_field(&PipelineConfig::W)},
      {"m0", uint_field(&PipelineConfig::m0)},
      {"tester_repetitions", uint_field(&PipelineConfig::tester_repetitions)},
      {"b", uint_field(&PipelineConfig::b)},
      {"L", uint_field(&PipelineConfig::L)},
      {"epsilon0", rat_field(&PipelineConfig::epsilon0)},
      {"seed", uint_field(&PipelineConfig::seed)},
      {"max_rounds", uint_field(&PipelineConfig::max_rounds)},
      {"val_budget", uint_field(&PipelineConfig::val_budget)},
      {"path_budget", uint_field(&PipelineConfig::path_budget)},
      {"tableau_budget", uint_field(&PipelineConfig::tableau_budget)},
      {"expander_attempts", uint_field(&PipelineConfig::expander_attempts)},
      {"spectral_exact_cap", uint_field(&PipelineConfig::spectral_exact_cap)},
  };
  return f;
}

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void write_config(std::ostream& os, const PipelineConfig& cfg) {
  os << "pcpconfig v1\n";
  for (const auto& [name, f] : fields()) os << name << " = " << f.get(cfg) << "\n";
}

PipelineConfig read_config(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "pcpconfig v1") throw ParseError("expected header 'pcpconfig v1'");
  PipelineConfig cfg;
  std::map<std::string, const Field*> index;
  for (const auto& [name, f] : fields()) index[name] = &f;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value': " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto it = index.find(key);
    if (it == index.end()) throw ParseError("unknown config key '" + key + "'");
    if (value.empty()) throw ParseError("missing value for '" + key + "'");
    it->second->set(cfg, value);
  }
  try {
    cfg.validate();
  } catch (const ParameterError& e) {
    throw ParseError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

}  // namespace pcpkit
