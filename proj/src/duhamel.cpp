#include "gph/duhamel.hpp"

#include <map>
#include <tuple>

#include "gph/nls.hpp"

namespace gph {

namespace {

void check_times(const DuhamelTimes& tm, int r) {
  if (static_cast<int>(tm.times.size()) != r)
    throw ConfigError("need " + std::to_string(r) + " time variables, got " + std::to_string(tm.times.size()));
}

}  // namespace

SeparableDensityMatrix evaluate_duhamel_integrand(const CollisionMap& sigma, const TorusField& phi,
                                                  const DuhamelTimes& tm) {
  check_times(tm, sigma.r());
  return compose_duhamel(SeparableDensityMatrix::factorized(phi, sigma.k() + sigma.r()), sigma, tm);
}

DensityMatrix evaluate_duhamel_integrand_dense(const CollisionMap& sigma, const TorusField& phi,
                                               const DuhamelTimes& tm) {
  check_times(tm, sigma.r());
  return compose_duhamel(factorized_state(phi, sigma.k() + sigma.r()), sigma, tm);
}

TreeFactors evaluate_tree_factors(const TreeForest& forest, const TorusField& phi, const DuhamelTimes& tm) {
  check_times(tm, forest.r);
  TreeFactors out{{}, SeparableDensityMatrix(phi.lattice(), forest.k)};
  for (const Tree& tree : forest.trees) {
    const int m = static_cast<int>(tree.labels.size());
    // The tree's own chain: internal slot a+1 is collided at time t_{l_{j,a}}.
    DuhamelTimes local{tm.t, {}, tm.leaf_time()};
    for (int l : tree.labels) local.times.push_back(tm.at(l));
    const CollisionMap inner(1, m, tree.internal_map);
    out.factors.push_back(compose_duhamel(SeparableDensityMatrix::factorized(phi, m + 1), inner, local));
  }
  out.product = out.factors.front();
  for (std::size_t j = 1; j < out.factors.size(); ++j) out.product = tensor_product(out.product, out.factors[j]);
  return out;
}

LowRankKernel ThetaTableau::resum(double t) const {
  LowRankKernel k(top.front().chi->lattice());
  for (const auto& term : top) k.add(term.c, term.chi, term.psi);
  return free_evolve(k, t - top_time);
}

namespace {

class ThetaBuilder {
 public:
  ThetaBuilder(const TreeForest& f, const TorusField& phi, const DuhamelTimes& tm)
      : f_(f), tm_(tm), phi_(share(phi)) {}

  /// Terms of the subtree below x, propagated to time `to`.
  std::vector<ThetaTerm> at(const Vertex& x, double to, std::vector<ThetaVertex>& log) {
    std::vector<ThetaTerm> terms;
    double from = tm_.leaf_time();
    if (x.kind == Vertex::Kind::leaf) {
      terms.push_back({1.0, phi_, phi_, false, false});
    } else {
      const InternalVertex& v = f_.internal[std::size_t(x.index - 1)];
      from = tm_.at(v.label);
      terms = combine(at(v.kept, from, log), at(v.traced, from, log), v.label == f_.r);
      log.push_back({v.label, 0, terms, 0});
    }
    return propagate(terms, to - from);
  }

 private:
  std::vector<ThetaTerm> propagate(std::vector<ThetaTerm> terms, double dt) {
    if (dt == 0.0) return terms;
    std::map<const TorusField*, FieldPtr> done;
    auto u = [&](const FieldPtr& f) {
      auto [it, fresh] = done.try_emplace(f.get());
      if (fresh) it->second = share(free_propagate(*f, dt));
      return it->second;
    };
    for (auto& t : terms) {
      t.chi = u(t.chi);
      t.psi = u(t.psi);
    }
    return terms;
  }

  FieldPtr product(const FieldPtr& a, const FieldPtr& b, const FieldPtr& c) {
    auto key = std::make_tuple(a.get(), b.get(), c.get());
    auto [it, fresh] = products_.try_emplace(key);
    if (fresh) {
      it->second = share(triple_product(*a, *b, *c));
      keep_.insert(keep_.end(), {a, b, c});
    }
    return it->second;
  }

  // B_{1,2} on (sum_a c_a |chi_a><psi_a|) (x) (sum_b c_b |chi_b><psi_b|).
  // The last collision v_r produces psi~ from leaves only.
  std::vector<ThetaTerm> combine(const std::vector<ThetaTerm>& kept, const std::vector<ThetaTerm>& traced,
                                 bool last) {
    std::vector<ThetaTerm> out;
    for (const auto& a : kept)
      for (const auto& b : traced) {
        const bool d = last || b.chi_distinguished || b.psi_distinguished;
        out.push_back({a.c * b.c, product(a.chi, b.psi, b.chi), a.psi, a.chi_distinguished || d,
                       a.psi_distinguished});
        out.push_back({-a.c * b.c, a.chi, product(a.psi, b.chi, b.psi), a.chi_distinguished,
                       a.psi_distinguished || d});
      }
    return out;
  }

  const TreeForest& f_;
  const DuhamelTimes& tm_;
  FieldPtr phi_;
  std::map<std::tuple<const TorusField*, const TorusField*, const TorusField*>, FieldPtr> products_;
  std::vector<FieldPtr> keep_;
};

}  // namespace

ThetaTableau expand_theta_kernels(const TreeForest& forest, int j, const TorusField& phi, const DuhamelTimes& tm) {
  check_times(tm, forest.r);
  if (j < 1 || j > forest.k) throw ConfigError("tree index out of range");
  const Tree& tree = forest.trees[std::size_t(j - 1)];
  ThetaTableau tab;
  tab.tree = j;
  ThetaBuilder b(forest, phi, tm);
  std::vector<ThetaVertex> log;
  tab.top_time = tree.top.kind == Vertex::Kind::leaf ? tm.leaf_time() : tm.at(tree.top.index);
  tab.top = b.at(tree.top, tab.top_time, log);
  const int m = static_cast<int>(tree.labels.size());
  for (int a = 1; a <= m; ++a) {
    for (auto& v : log)
      if (v.label == tree.labels[std::size_t(a - 1)]) {
        v.a = a;
        v.bound = std::size_t(1) << (m - a + 1);
        tab.vertices.push_back(std::move(v));
      }
  }
  return tab;
}

}  // namespace gph
