#include "twomed/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

namespace twomed {

namespace {

constexpr std::size_t kMaxLevels = 64;

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::string pattern(const std::vector<double>& c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.size(); ++i) s += (i ? ", " : "") + fmt(c[i]);
  return s + ")";
}

std::size_t level_index(const std::vector<double>& support, double x, const char* what) {
  auto it = std::lower_bound(support.begin(), support.end(), x);
  if (it == support.end() || *it != x)
    throw DomainError(std::string(what) + " level " + fmt(x) + " is not in the observed support");
  return static_cast<std::size_t>(it - support.begin());
}

std::vector<double> distinct(const Eigen::VectorXd& v, const std::string& name) {
  std::set<double> s(v.data(), v.data() + v.size());
  if (s.size() > kMaxLevels)
    throw DataError("column '" + name + "' has " + std::to_string(s.size()) +
                    " distinct values; the categorical estimator needs at most " +
                    std::to_string(kMaxLevels) + " (use the closed-form estimator instead)");
  return {s.begin(), s.end()};
}

}  // namespace

std::size_t ProbTables::stratum_index(std::span<const double> c) const {
  const std::vector<double> key(c.begin(), c.end());
  auto it = std::lower_bound(strata.begin(), strata.end(), key);
  if (it == strata.end() || *it != key)
    throw DomainError("covariate pattern " + pattern(key) + " is not an observed stratum");
  return static_cast<std::size_t>(it - strata.begin());
}

const std::vector<double>& ProbTables::dist_m1(std::size_t s, double a) const {
  auto it = pr_m1.find({s, a});
  if (it == pr_m1.end())
    throw EstimationError("no rows with A=" + fmt(a) + " in stratum " + pattern(strata.at(s)) +
                          "; Pr(M1 | a, c) is undefined");
  return it->second;
}

const std::vector<double>& ProbTables::dist_m2(std::size_t s, double a, double m1) const {
  auto it = pr_m2.find({s, a, m1});
  if (it == pr_m2.end())
    throw EstimationError("no rows with A=" + fmt(a) + ", M1=" + fmt(m1) + " in stratum " +
                          pattern(strata.at(s)) + "; Pr(M2 | a, m1, c) is undefined");
  return it->second;
}

double ProbTables::outcome_mean(std::size_t s, double a, double m1, double m2) const {
  auto it = p_y.find({s, a, m1, m2});
  if (it == p_y.end())
    throw EstimationError("empty cell A=" + fmt(a) + ", M1=" + fmt(m1) + ", M2=" + fmt(m2) +
                          " in stratum " + pattern(strata.at(s)) +
                          " carries positive weight; coarsen the strata");
  return it->second;
}

void ProbTables::validate() const {
  auto check = [](const std::vector<double>& p, std::size_t n, const char* what) {
    if (p.size() != n) throw EstimationError(std::string(what) + " has the wrong length");
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0.0 && v <= 1.0)) throw EstimationError(std::string(what) + " outside [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw EstimationError(std::string(what) + " does not sum to 1");
  };
  for (const auto& [k, p] : pr_m1) check(p, support_m1.size(), "Pr(M1 | a, c)");
  for (const auto& [k, p] : pr_m2) check(p, support_m2.size(), "Pr(M2 | a, m1, c)");
}

ProbTables estimate_tables(const Dataset& d, const ReferenceConfig& cfg) {
  d.validate();
  if (d.n() == 0) throw DataError("dataset is empty");
  ProbTables t;
  t.support_a = distinct(d.a, d.a_name);
  t.support_m1 = distinct(d.m1, d.m1_name);
  t.support_m2 = distinct(d.m2, d.m2_name);
  for (std::size_t j = 0; j < d.k(); ++j)
    distinct(d.covariates.col(static_cast<Eigen::Index>(j)),
             j < d.covariate_names.size() ? d.covariate_names[j] : "C" + std::to_string(j));

  std::set<std::vector<double>> patterns;
  std::vector<std::vector<double>> row_pattern(d.n());
  for (std::size_t i = 0; i < d.n(); ++i) {
    auto& p = row_pattern[i];
    p.resize(d.k());
    for (std::size_t j = 0; j < d.k(); ++j)
      p[j] = d.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    patterns.insert(p);
  }
  t.strata.assign(patterns.begin(), patterns.end());

  std::map<ProbTables::M1Key, std::vector<double>> n_m1;
  std::map<ProbTables::M2Key, std::vector<double>> n_m2;
  std::map<ProbTables::CellKey, double> y_sum;
  for (std::size_t i = 0; i < d.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const std::size_t s = t.stratum_index(row_pattern[i]);
    const double a = d.a[r], m1 = d.m1[r], m2 = d.m2[r];
    auto& c1 = n_m1[{s, a}];
    c1.resize(t.support_m1.size(), 0.0);
    c1[level_index(t.support_m1, m1, "M1")] += 1.0;
    auto& c2 = n_m2[{s, a, m1}];
    c2.resize(t.support_m2.size(), 0.0);
    c2[level_index(t.support_m2, m2, "M2")] += 1.0;
    y_sum[{s, a, m1, m2}] += d.y[r];
    t.cell_count[{s, a, m1, m2}] += 1;
  }
  auto normalize = [](std::vector<double> counts) {
    double total = 0.0;
    for (double c : counts) total += c;
    for (double& c : counts) c /= total;
    return counts;
  };
  for (auto& [k, c] : n_m1) t.pr_m1[k] = normalize(c);
  for (auto& [k, c] : n_m2) t.pr_m2[k] = normalize(c);
  for (auto& [k, s] : y_sum) t.p_y[k] = s / static_cast<double>(t.cell_count[k]);

  if (cfg.covariates.size() != d.k())
    throw DomainError("reference covariates have dimension " +
                      std::to_string(cfg.covariates.size()) + ", dataset has " +
                      std::to_string(d.k()));
  const std::size_t s = t.stratum_index(cfg.covariates);
  for (double x : {cfg.a, cfg.a_star}) t.dist_m1(s, x);
  return t;
}

ProbTables tables_from_binary_scm(const BinaryScm& scm) {
  scm.validate();
  ProbTables t;
  t.support_a = t.support_m1 = t.support_m2 = {0.0, 1.0};
  t.strata = {{}};
  for (int a = 0; a < 2; ++a) {
    const double p1 = scm.p_m1_given_a[a];
    t.pr_m1[{0, a}] = {1.0 - p1, p1};
    for (int m1 = 0; m1 < 2; ++m1) {
      const double p2 = scm.p_m2_given_a_m1[a][m1];
      t.pr_m2[{0, a, m1}] = {1.0 - p2, p2};
      for (int m2 = 0; m2 < 2; ++m2) t.p_y[{0, a, m1, m2}] = scm.e_y[a][m1][m2];
    }
  }
  return t;
}

ComponentSet decompose_empirical_sequential(const ProbTables& t, const ReferenceConfig& cfg) {
  if (cfg.topology != Topology::Sequential)
    throw DomainError("the categorical estimator covers the sequential topology only");
  cfg.validate();
  const double a = cfg.a, as = cfg.a_star, r1 = cfg.m1_star, r2 = cfg.m2_star;
  level_index(t.support_a, a, "exposure");
  level_index(t.support_a, as, "reference exposure");
  level_index(t.support_m1, r1, "M1 reference");
  level_index(t.support_m2, r2, "M2 reference");
  const std::size_t s = t.stratum_index(cfg.covariates);

  const auto& l1 = t.support_m1;
  const auto& l2 = t.support_m2;
  const auto& p1a = t.dist_m1(s, a);
  const auto& p1s = t.dist_m1(s, as);
  auto p = [&](double x, double m1, double m2) { return t.outcome_mean(s, x, m1, m2); };

  SequentialTerms r;
  Aggregates g;
  r.cde = p(a, r1, r2) - p(as, r1, r2);

  for (std::size_t i = 0; i < l1.size(); ++i) {
    const double m1 = l1[i];
    const double w_s = p1s[i], w_a = p1a[i], dp1 = w_a - w_s;
    if (w_s != 0.0)
      r.int_ref_am1 += (p(a, m1, r2) - p(a, r1, r2) - p(as, m1, r2) + p(as, r1, r2)) * w_s;
    if (w_s == 0.0 && w_a == 0.0) continue;

    // Pr(M2 | a*, m1) and Pr(M2 | a, m1) both carry weight once M1 = m1 has
    // positive probability under a or a*.
    const auto& q2s = t.dist_m2(s, as, m1);
    const auto& q2a = t.dist_m2(s, a, m1);

    for (std::size_t j = 0; j < l2.size(); ++j) {
      const double m2 = l2[j];
      const double qs = q2s[j], qa = q2a[j], dq = qa - qs;

      const double w_ir2 = w_s * qs;
      if (w_ir2 != 0.0)
        r.int_ref_am2_plus_am1m2 +=
            (p(a, m1, m2) - p(a, m1, r2) - p(as, m1, m2) + p(as, m1, r2)) * w_ir2;

      const double w_am1 = qs * dp1, w_am2 = w_s * dq, w_am1m2 = dp1 * dq;
      const double w_te_a = w_a * qa, w_te_s = w_s * qs, w_sie = qa * dp1;
      const bool need_a =
          w_am1 != 0.0 || w_am2 != 0.0 || w_am1m2 != 0.0 || w_te_a != 0.0 || w_te_s != 0.0;
      const bool need_s = need_a || w_sie != 0.0;
      if (!need_s) continue;
      const double ya = need_a ? p(a, m1, m2) : 0.0;
      const double ys = p(as, m1, m2);
      const double dy = ya - ys;

      r.natint_am1 += dy * w_am1;
      r.natint_am2 += dy * w_am2;
      r.natint_am1m2 += dy * w_am1m2;
      r.natint_m1m2 += ys * w_am1m2;
      r.pie_m1 += ys * w_am1;
      r.pie_m2 += ys * w_am2;

      g.te += ya * w_te_a - ys * w_te_s;
      g.pde += dy * w_te_s;
      g.tde += dy * w_te_a;
      g.sie_m1 += ys * w_sie;
    }
  }
  return ComponentSet(r, g);
}

}  // namespace twomed
