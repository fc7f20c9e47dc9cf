#include "confocal/conservation.hpp"

#include "confocal/lax.hpp"

#include <algorithm>
#include <cmath>

namespace confocal {

std::vector<double> probe_lambdas(const SystemSpec& sys, std::size_t count) {
  const Vec& g = sys.ellipsoid.group_values();
  std::vector<double> v(g.data(), g.data() + g.size());
  std::sort(v.begin(), v.end());
  const double w = std::max(v.back() - v.front(), 1.0);
  std::vector<double> cand{v.front() - 0.37 * w};
  for (std::size_t i = 0; i + 1 < v.size(); ++i) cand.push_back(0.5 * (v[i] + v[i + 1]));
  for (double k : {0.41, 1.3, 2.7, 4.1, 5.9}) cand.push_back(v.back() + k * w);

  std::vector<double> out;
  for (double l : cand) {
    if (out.size() == count) break;
    if (sys.constrained() && std::abs(l) < 0.05 * w) l += 0.1 * w;
    out.push_back(l);
  }
  return out;
}

std::vector<NamedValue> conserved_quantities(const SystemSpec& sys, const PhaseState& s,
                                             const std::vector<double>& lambdas) {
  std::vector<NamedValue> out;
  const IntegralFamily F = integral_family(sys, s);
  out.push_back({"H", F.energy});
  const bool symmetric = F.f.size() == 0;
  if (!symmetric) {
    for (Eigen::Index i = 0; i < F.f.size(); ++i) out.push_back({"f_" + std::to_string(i), F.f[i]});
  } else {
    for (Eigen::Index g = 0; g < F.f_tilde.size(); ++g) {
      const std::string gs = std::to_string(g);
      out.push_back({"f~_" + gs, F.f_tilde[g]});
      const Mat& Pp = F.P_pair[static_cast<std::size_t>(g)];
      if (Pp.rows() < 2) continue;
      out.push_back({"P_" + gs, F.P[g]});
      for (Eigen::Index u = 0; u < Pp.rows(); ++u)
        for (Eigen::Index v = u + 1; v < Pp.cols(); ++v)
          out.push_back({"P_" + gs + "_" + std::to_string(u) + std::to_string(v), Pp(u, v)});
      const Vec& Lc = F.L_chain[static_cast<std::size_t>(g)];
      for (Eigen::Index k = 0; k < Lc.size(); ++k)
        out.push_back({"L_" + gs + "_" + std::to_string(k + 1), Lc[k]});
    }
  }
  for (Eigen::Index i = 0; i < F.g.size(); ++i) out.push_back({"g_" + std::to_string(i), F.g[i]});
  if (F.J) out.push_back({"J", *F.J});
  for (std::size_t l = 0; l < lambdas.size(); ++l)
    out.push_back({"detL_" + std::to_string(l), det_L(sys, s, lambdas[l])});
  return out;
}

double relative_drift(double v, double v0, double scale) {
  return std::abs(v - v0) / std::max(std::abs(v0), 1e-3 * (1.0 + std::abs(scale)));
}

DriftReport conservation_drift(const SystemSpec& sys, const std::vector<PhaseState>& traj,
                               const std::vector<double>& lambdas) {
  DriftReport rep;
  if (traj.empty()) return rep;
  const auto first = conserved_quantities(sys, traj.front(), lambdas);
  const double scale = 2.0 * first.front().value;
  rep.max_drift = Vec::Zero(static_cast<Eigen::Index>(first.size()));
  for (const auto& q : first) rep.names.push_back(q.name);
  for (const PhaseState& s : traj) {
    const auto cur = conserved_quantities(sys, s, lambdas);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      rep.max_drift[k] = std::max(rep.max_drift[k], relative_drift(cur[i].value, first[i].value, scale));
    }
    rep.max_constraint = std::max(rep.max_constraint, constraint_residuals(sys, s).max_abs());
  }
  return rep;
}

}  // namespace confocal
