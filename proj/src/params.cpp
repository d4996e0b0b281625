#include "relaydde/params.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <string>

namespace relaydde {

Params validate_params(double a1, double a2, double p1, double p2, double mu) {
  std::vector<NonPositiveParameter> bad;
  auto check = [&](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) bad.push_back({name, v});
  };
  check("a1", a1);
  check("a2", a2);
  check("p1", p1);
  check("p2", p2);
  check("mu", mu);
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "invalid parameters:";
    for (const auto& v : bad) msg << ' ' << v.name << " must be > 0 (got " << v.value << ')';
    throw InvalidParameters(std::move(bad), msg.str());
  }
  return Params{a1, a2, p1, p2, mu};
}

namespace {

double parse_double(std::string_view token, const std::string& context) {
  // Trim surrounding whitespace.
  size_t b = token.find_first_not_of(" \t\r");
  size_t e = token.find_last_not_of(" \t\r");
  if (b == std::string_view::npos) throw Error("missing value for " + context);
  token = token.substr(b, e - b + 1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw Error("cannot parse number '" + std::string(token) + "' for " + context);
  return value;
}

}  // namespace

Params params_from_config_text(std::string_view text) {
  std::map<std::string, double> seen;
  size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) continue;
    size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error("config line " + std::to_string(line_no) + " has no '='");
    std::string_view key_raw = line.substr(0, eq);
    size_t kb = key_raw.find_first_not_of(" \t");
    size_t ke = key_raw.find_last_not_of(" \t");
    if (kb == std::string_view::npos)
      throw Error("config line " + std::to_string(line_no) + " has an empty key");
    std::string key(key_raw.substr(kb, ke - kb + 1));
    if (key != "a1" && key != "a2" && key != "p1" && key != "p2" && key != "mu")
      throw Error("unknown config key '" + key + "'");
    if (seen.count(key)) throw Error("duplicate config key '" + key + "'");
    seen[key] = parse_double(line.substr(eq + 1), "key '" + key + "'");
  }
  for (const char* key : {"a1", "a2", "p1", "p2", "mu"})
    if (!seen.count(key)) throw Error(std::string("config is missing key '") + key + "'");
  return validate_params(seen["a1"], seen["a2"], seen["p1"], seen["p2"], seen["mu"]);
}

double fold_time(double t, double period) {
  if (t < 0.0) t += std::ceil(-t / period) * period;
  double r = std::fmod(t, period);
  if (r < 0.0) r += period;       // fmod of a value that rounded to just below 0
  if (r >= period) r = 0.0;       // folded value rounded up to the period itself
  return r;
}

double coefficient_at(const Params& params, double t) {
  double r = fold_time(t, params.period());
  return r < params.p1 ? params.a1 : params.a2;
}

int relay_feedback(double x) {
  if (x > 0.0) return -1;
  if (x < 0.0) return 1;
  return 0;
}

}  // namespace relaydde
