#include "contraforge/agreement.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "contraforge/error.hpp"

namespace contraforge {

namespace {

std::size_t n_items(const LabelMatrix& labels) {
  std::size_t n = 0;
  for (const auto& row : labels) n = std::max(n, row.size());
  return n;
}

std::vector<int> item_labels(const LabelMatrix& labels, std::size_t i) {
  std::vector<int> out;
  for (const auto& row : labels) {
    if (i < row.size() && row[i]) out.push_back(*row[i]);
  }
  return out;
}

}  // namespace

double percent_agreement(const LabelMatrix& labels) {
  std::size_t co = 0;
  std::size_t same = 0;
  for (std::size_t i = 0, n = n_items(labels); i < n; ++i) {
    const auto ls = item_labels(labels, i);
    if (ls.size() < 2) continue;
    ++co;
    if (std::all_of(ls.begin(), ls.end(), [&](int l) { return l == ls.front(); })) ++same;
  }
  if (co == 0) throw PreconditionError("no co-labeled items");
  return static_cast<double>(same) / static_cast<double>(co);
}

std::optional<double> cohen_kappa(const std::vector<std::optional<int>>& a,
                                  const std::vector<std::optional<int>>& b) {
  std::map<int, double> ma;
  std::map<int, double> mb;
  std::size_t n = 0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (!a[i] || !b[i]) continue;
    ++n;
    if (*a[i] == *b[i]) ++agree;
    ma[*a[i]] += 1.0;
    mb[*b[i]] += 1.0;
  }
  if (n == 0) throw PreconditionError("no co-labeled items");
  const double nn = static_cast<double>(n);
  const double p_o = static_cast<double>(agree) / nn;
  double p_e = 0.0;
  for (const auto& [c, count] : ma) {
    auto it = mb.find(c);
    if (it != mb.end()) p_e += (count / nn) * (it->second / nn);
  }
  if (p_e >= 1.0) return std::nullopt;
  return (p_o - p_e) / (1.0 - p_e);
}

std::optional<double> kripp_alpha(const LabelMatrix& labels) {
  std::map<std::pair<int, int>, double> o;
  std::set<int> categories;
  bool any = false;
  for (std::size_t i = 0, n = n_items(labels); i < n; ++i) {
    const auto ls = item_labels(labels, i);
    const std::size_t m = ls.size();
    if (m < 2) continue;
    any = true;
    for (std::size_t x = 0; x < m; ++x) {
      categories.insert(ls[x]);
      for (std::size_t y = 0; y < m; ++y) {
        if (x != y) o[{ls[x], ls[y]}] += 1.0 / static_cast<double>(m - 1);
      }
    }
  }
  if (!any) throw PreconditionError("no co-labeled items");
  std::map<int, double> n_c;
  double n = 0.0;
  for (const auto& [ck, v] : o) {
    n_c[ck.first] += v;
    n += v;
  }
  double observed = 0.0;
  for (const auto& [ck, v] : o) {
    if (ck.first != ck.second) observed += v;
  }
  double expected = 0.0;
  for (int c : categories) {
    for (int k : categories) {
      if (c != k) expected += n_c[c] * n_c[k];
    }
  }
  if (expected <= 0.0) return std::nullopt;
  return 1.0 - (n - 1.0) * observed / expected;
}

AgreementReport agreement_report(const LabelMatrix& labels) {
  LabelMatrix active;
  for (const auto& row : labels) {
    if (std::any_of(row.begin(), row.end(), [](const auto& l) { return l.has_value(); })) {
      active.push_back(row);
    }
  }
  AgreementReport r;
  r.n_annotators = active.size();
  for (std::size_t i = 0, n = n_items(active); i < n; ++i) {
    if (item_labels(active, i).size() >= 2) ++r.n_items;
  }
  r.percent_agreement = percent_agreement(active);
  std::vector<std::string> reasons;
  if (active.size() == 2) {
    r.cohen_kappa = cohen_kappa(active[0], active[1]);
    if (!r.cohen_kappa) reasons.emplace_back("cohen_kappa undefined: chance agreement is 1");
  } else {
    reasons.emplace_back("cohen_kappa needs exactly 2 annotators, have " +
                         std::to_string(active.size()));
  }
  r.kripp_alpha = kripp_alpha(active);
  if (!r.kripp_alpha) reasons.emplace_back("kripp_alpha undefined: only one label value in use");
  for (std::size_t i = 0; i < reasons.size(); ++i) r.reason += (i ? "; " : "") + reasons[i];
  return r;
}

}  // namespace contraforge
