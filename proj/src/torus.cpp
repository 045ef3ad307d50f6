#include "finsler/torus.hpp"

#include <cmath>
#include <sstream>

#include "finsler/errors.hpp"

namespace finsler {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

double number(const std::string& t, const std::string& context) {
  try {
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("expected a number in '" + context + "', got '" + t + "'");
  }
}

int integer(const std::string& t, const std::string& context) {
  double v = number(t, context);
  if (v != std::round(v)) throw ConfigError("expected an integer wave number in '" + context + "'");
  return static_cast<int>(v);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

void BaseDomain::validate() const {
  if (dimension < 2) throw ConfigError("base dimension must be >= 2");
  if (static_cast<int>(periods.size()) != dimension) throw ConfigError("one period per coordinate required");
  for (double p : periods)
    if (!(p > 0)) throw ConfigError("periods must be positive");
}

TorusFunction TorusFunction::constant(double c) {
  TorusFunction f;
  f.constant_ = c;
  return f;
}

TorusFunction TorusFunction::cosine(double constant, std::vector<CosineMode> modes, bool exponential) {
  TorusFunction f;
  f.constant_ = constant;
  f.modes_ = std::move(modes);
  f.exponential_ = exponential;
  return f;
}

TorusFunction TorusFunction::bump(double kappa, std::vector<double> center) {
  const int n = static_cast<int>(center.size());
  std::vector<CosineMode> modes;
  for (int i = 0; i < n; ++i) {
    std::vector<int> k(n, 0);
    k[i] = 1;
    modes.push_back({kappa, k, -center[i]});
  }
  return cosine(-kappa * n, std::move(modes), true);
}

TorusFunction TorusFunction::parse(const std::string& text, int dim) {
  std::string body = trim(text);
  bool exponential = false;
  if (body.rfind("exp:", 0) == 0) {
    exponential = true;
    body = body.substr(4);
  }
  double c = 0.0;
  std::vector<CosineMode> modes;
  bool saw_bump = false;
  for (const auto& raw : split(body, ';')) {
    auto t = tokens(raw);
    if (t.empty()) continue;
    if (t[0] == "cos" || t[0] == "sin") {
      const std::size_t need = 2 + dim + (t[0] == "cos" ? 1 : 0);
      if (t.size() != need) throw ConfigError("'" + raw + "': wrong number of fields");
      CosineMode m;
      m.amplitude = number(t[1], raw);
      for (int i = 0; i < dim; ++i) m.wave.push_back(integer(t[2 + i], raw));
      m.phase = t[0] == "cos" ? number(t[2 + dim], raw) : -std::numbers::pi / 2;
      modes.push_back(m);
    } else if (t[0] == "bump") {
      if (t.size() != static_cast<std::size_t>(2 + dim)) throw ConfigError("'" + raw + "': wrong number of fields");
      std::vector<double> center;
      for (int i = 0; i < dim; ++i) center.push_back(number(t[2 + i], raw));
      auto b = bump(number(t[1], raw), center);
      c += b.constant_;
      modes.insert(modes.end(), b.modes_.begin(), b.modes_.end());
      saw_bump = true;
    } else if (t.size() == 1) {
      c += number(t[0], raw);
    } else {
      throw ConfigError("unrecognised function term '" + raw + "'");
    }
  }
  if (saw_bump) {
    if (exponential) throw ConfigError("'bump' is already exponential");
    exponential = true;
  }
  return cosine(c, std::move(modes), exponential);
}

std::string TorusFunction::describe() const {
  std::ostringstream out;
  out.precision(17);
  if (exponential_) out << "exp:";
  out << constant_;
  for (const auto& m : modes_) {
    out << "; cos " << m.amplitude;
    for (int k : m.wave) out << ' ' << k;
    out << ' ' << m.phase;
  }
  return out.str();
}

AnalyticDiffeo::AnalyticDiffeo(int dim, std::vector<DiffeoMode> modes) : dim_(dim), modes_(std::move(modes)) {
  double lipschitz = 0.0;
  for (const auto& m : modes_) {
    if (static_cast<int>(m.displacement.size()) != dim || static_cast<int>(m.wave.size()) != dim)
      throw ConfigError("diffeomorphism mode has wrong dimension");
    double d = 0.0, k = 0.0;
    for (int i = 0; i < dim; ++i) {
      d += m.displacement[i] * m.displacement[i];
      k += static_cast<double>(m.wave[i]) * m.wave[i];
    }
    lipschitz += std::sqrt(d * k);
  }
  if (lipschitz >= 1.0) throw ConfigError("diffeomorphism perturbation too large to be invertible");
}

AnalyticDiffeo AnalyticDiffeo::parse(const std::string& text, int dim) {
  std::vector<DiffeoMode> modes;
  for (const auto& raw : split(text, ';')) {
    auto t = tokens(raw);
    if (t.empty()) continue;
    if (t[0] != "sin" || t.size() != static_cast<std::size_t>(2 + 2 * dim))
      throw ConfigError("diffeomorphism term must be 'sin d1..dn k1..kn phase': '" + raw + "'");
    DiffeoMode m;
    for (int i = 0; i < dim; ++i) m.displacement.push_back(number(t[1 + i], raw));
    for (int i = 0; i < dim; ++i) m.wave.push_back(integer(t[1 + dim + i], raw));
    m.phase = number(t[1 + 2 * dim], raw);
    modes.push_back(m);
  }
  return AnalyticDiffeo(dim, std::move(modes));
}

}  // namespace finsler
