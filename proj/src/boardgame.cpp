#include "gph/boardgame.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "gph/errors.hpp"

namespace gph {

CollisionMap::CollisionMap(int k, int r, std::vector<int> values) : k_(k), values_(std::move(values)) {
  if (k < 1 || r < 0) throw ConfigError("collision maps need k >= 1 and r >= 0");
  if (static_cast<int>(values_.size()) != r) throw ConfigError("collision map needs r values");
  for (int l = 1; l <= r; ++l) {
    const int v = values_[std::size_t(l - 1)];
    if (v < 1 || v >= k + l)
      throw ConfigError("collision map value rho(" + std::to_string(k + l) + ")=" + std::to_string(v) +
                        " violates 1 <= rho(j) < j");
  }
}

bool CollisionMap::is_upper_echelon() const noexcept {
  return std::is_sorted(values_.begin(), values_.end());
}

std::string CollisionMap::encode() const {
  std::string s;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(values_[i]);
  }
  return s;
}

namespace {
void check_board(int k, int r) {
  if (k < 1 || r < 0) throw ConfigError("need k >= 1 and r >= 0");
  if (k + r > kMaxBoardSize)
    throw ConfigError("k+r=" + std::to_string(k + r) + " exceeds the enumeration limit " +
                      std::to_string(kMaxBoardSize));
}
}  // namespace

std::size_t collision_map_count(int k, int r) {
  std::size_t n = 1;
  for (int l = 1; l <= r; ++l) n *= std::size_t(k + l - 1);
  return n;
}

std::vector<CollisionMap> enumerate_collision_maps(int k, int r) {
  check_board(k, r);
  std::vector<CollisionMap> out;
  out.reserve(collision_map_count(k, r));
  std::vector<int> v(std::size_t(r), 1);
  while (true) {
    out.emplace_back(k, r, v);
    int l = r;
    while (l >= 1 && v[std::size_t(l - 1)] == k + l - 1) {
      v[std::size_t(l - 1)] = 1;
      --l;
    }
    if (l < 1) break;
    ++v[std::size_t(l - 1)];
  }
  return out;
}

bool move_is_acceptable(const CollisionMap& rho, int j) {
  if (j < rho.k() + 1 || j + 1 > rho.k() + rho.r()) return false;
  return rho(j + 1) < rho(j);
}

CollisionMap apply_move(const CollisionMap& rho, int j) {
  if (!move_is_acceptable(rho, j)) throw ConfigError("move at column " + std::to_string(j) + " is not acceptable");
  auto tau = [j](int x) { return x == j ? j + 1 : (x == j + 1 ? j : x); };
  std::vector<int> v(rho.values().size());
  for (int i = rho.k() + 1; i <= rho.k() + rho.r(); ++i) v[std::size_t(i - rho.k() - 1)] = tau(rho(tau(i)));
  return CollisionMap(rho.k(), rho.r(), std::move(v));
}

Reduction reduce_to_echelon(const CollisionMap& rho) {
  Reduction red{rho, std::vector<int>(std::size_t(rho.r())), 0};
  std::iota(red.time_perm.begin(), red.time_perm.end(), 0);
  bool moved = true;
  while (moved) {
    moved = false;
    for (int j = rho.k() + 1; j < rho.k() + rho.r(); ++j)
      if (move_is_acceptable(red.sigma, j)) {
        red.sigma = apply_move(red.sigma, j);
        const std::size_t l = std::size_t(j - rho.k() - 1);
        std::swap(red.time_perm[l], red.time_perm[l + 1]);
        ++red.moves;
        moved = true;
        break;
      }
  }
  return red;
}

EchelonPartition upper_echelon_classes(int k, int r) {
  EchelonPartition p;
  p.k = k;
  p.r = r;
  p.maps = enumerate_collision_maps(k, r);
  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t i = 0; i < p.maps.size(); ++i) index.emplace(p.maps[i].values(), i);
  std::vector<std::size_t> parent(p.maps.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < p.maps.size(); ++i)
    for (int j = k + 1; j < k + r; ++j)
      if (move_is_acceptable(p.maps[i], j)) {
        const std::size_t a = find(i), b = find(index.at(apply_move(p.maps[i], j).values()));
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::map<std::size_t, std::size_t> class_id;
  p.class_of.resize(p.maps.size());
  for (std::size_t i = 0; i < p.maps.size(); ++i) {
    const std::size_t root = find(i);
    auto [it, fresh] = class_id.try_emplace(root, p.classes.size());
    if (fresh) p.classes.push_back({p.maps[i], {}, 0});
    EchelonClass& c = p.classes[it->second];
    c.members.push_back(i);
    if (p.maps[i].is_upper_echelon()) {
      if (c.monotone_members == 0) c.representative = p.maps[i];
      ++c.monotone_members;
    }
    p.class_of[i] = it->second;
  }
  return p;
}

std::string Vertex::name() const {
  return (kind == Kind::leaf ? "u" : "v") + std::to_string(index);
}

int TreeForest::distinguished_tree() const {
  for (const auto& t : trees)
    if (t.distinguished) return t.root;
  return 0;
}

std::string TreeForest::to_dot() const {
  std::ostringstream os;
  os << "graph forest {\n  rankdir=LR;\n";
  for (const auto& t : trees) {
    const char* style = t.distinguished ? " [style=bold]" : "";
    os << "  w" << t.root << " -- " << t.top.name() << style << ";\n";
  }
  for (const auto& v : internal) {
    const bool bold = trees[std::size_t(v.tree - 1)].distinguished;
    const char* style = bold ? " [style=bold]" : "";
    os << "  v" << v.label << " -- " << v.kept.name() << style << ";\n";
    os << "  v" << v.label << " -- " << v.traced.name() << style << ";\n";
  }
  os << "}\n";
  return os.str();
}

TreeForest build_tree_graph(const CollisionMap& sigma) {
  const int k = sigma.k(), r = sigma.r();
  TreeForest f;
  f.k = k;
  f.r = r;
  f.echelon = sigma.is_upper_echelon();
  f.internal.resize(std::size_t(r));
  f.leaf_parent.assign(std::size_t(k + r), 0);
  // node[s-1]: the vertex currently feeding slot s.
  std::vector<Vertex> node;
  for (int s = 1; s <= k + r; ++s) node.push_back({Vertex::Kind::leaf, s});
  auto adopt = [&](const Vertex& child, int l) {
    if (child.kind == Vertex::Kind::leaf) f.leaf_parent[std::size_t(child.index - 1)] = l;
  };
  for (int l = r; l >= 1; --l) {
    const int s = sigma(k + l);
    InternalVertex v{l, node[std::size_t(s - 1)], node[std::size_t(k + l - 1)], 0};
    adopt(v.kept, l);
    adopt(v.traced, l);
    f.internal[std::size_t(l - 1)] = v;
    node[std::size_t(s - 1)] = {Vertex::Kind::internal, l};
  }
  for (int j = 1; j <= k; ++j) {
    Tree t;
    t.root = j;
    t.top = node[std::size_t(j - 1)];
    // Collect the tree by depth-first search.
    std::vector<Vertex> stack{t.top};
    while (!stack.empty()) {
      const Vertex x = stack.back();
      stack.pop_back();
      if (x.kind == Vertex::Kind::leaf) {
        t.leaves.push_back(x.index);
        continue;
      }
      InternalVertex& v = f.internal[std::size_t(x.index - 1)];
      v.tree = j;
      t.labels.push_back(v.label);
      stack.push_back(v.traced);
      stack.push_back(v.kept);
    }
    std::sort(t.labels.begin(), t.labels.end());
    std::sort(t.leaves.begin(), t.leaves.end());
    t.distinguished = !t.labels.empty() && t.labels.back() == r;
    // Slot j is internal slot 1; the slot k+l_{j,a} is internal slot a+1.
    std::map<int, int> local{{j, 1}};
    for (std::size_t a = 0; a < t.labels.size(); ++a) local[k + t.labels[a]] = int(a) + 2;
    for (int l : t.labels) t.internal_map.push_back(local.at(sigma(k + l)));
    f.trees.push_back(std::move(t));
  }
  return f;
}

CollisionMap worked_example_map() { return CollisionMap(3, 5, {1, 2, 3, 4, 6}); }

}  // namespace gph
