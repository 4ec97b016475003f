#include "oracles.h"

#include <cmath>
#include <map>
#include <stdexcept>

namespace oracle {

double kth_smallest(const std::vector<double>& values, std::size_t k) {
  for (double candidate : values) {
    std::size_t less = 0;
    std::size_t equal = 0;
    for (double v : values) {
      if (v < candidate) ++less;
      if (v == candidate) ++equal;
    }
    if (less <= k && k < less + equal) return candidate;
  }
  throw std::logic_error("kth_smallest: k out of range");
}

double quantile7(const std::vector<double>& values, double p) {
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - std::floor(h);
  const double a = kth_smallest(values, lo);
  if (frac == 0.0) return a;
  const double b = kth_smallest(values, lo + 1);
  return a + frac * (b - a);
}

std::size_t visible_chars(std::string_view s) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    const std::string_view cp = s.substr(i, len);
    const bool space = cp == " " || cp == "\t" || cp == "\n" || cp == "\r" || cp == "　";
    if (!space) ++n;
    i += len;
  }
  return n;
}

std::set<std::string> kept_ids(const std::vector<wildcut::SegmentRecord>& records,
                               const FilterRule& rule) {
  std::map<std::string, std::vector<const wildcut::SegmentRecord*>> by_source;
  for (const auto& r : records) by_source[r.source_id].push_back(&r);

  std::set<std::string> kept;
  for (const auto& [sid, recs] : by_source) {
    std::vector<const wildcut::SegmentRecord*> pass;
    for (const auto* r : recs) {
      if (!rule.languages.count(r->language)) continue;
      if (r->lang_confidence < rule.min_conf) continue;
      if (!(r->dnsmos_ovrl > rule.min_quality)) continue;
      if (r->duration_s < rule.min_duration) continue;
      if (visible_chars(r->text) == 0) continue;
      pass.push_back(r);
    }
    if (pass.size() < rule.min_iqr_n) {
      for (const auto* r : pass) kept.insert(r->segment_id);
      continue;
    }
    std::vector<double> rates;
    for (const auto* r : pass) rates.push_back(r->duration_s / static_cast<double>(visible_chars(r->text)));
    const double q1 = quantile7(rates, 0.25);
    const double q3 = quantile7(rates, 0.75);
    const double lo = q1 - rule.iqr_k * (q3 - q1);
    const double hi = q3 + rule.iqr_k * (q3 - q1);
    for (std::size_t i = 0; i < pass.size(); ++i) {
      if (rates[i] >= lo && rates[i] <= hi) kept.insert(pass[i]->segment_id);
    }
  }
  return kept;
}

}  // namespace oracle
