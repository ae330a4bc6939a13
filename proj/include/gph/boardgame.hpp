#pragma once

// Collision maps rho : {k+1..k+r} -> {1..k+r-1} with rho(j) < j, their
// reduction to upper echelon (nondecreasing) form by Klainerman-Machedon
// acceptable moves, and the binary-tree forest attached to a map.

#include <cstddef>
#include <string>
#include <vector>

namespace gph {

class CollisionMap {
 public:
  /// values[l-1] = rho(k+l). Throws ConfigError unless k >= 1, r >= 0 and
  /// 1 <= rho(j) < j for every j.
  CollisionMap(int k, int r, std::vector<int> values);

  int k() const noexcept { return k_; }
  int r() const noexcept { return static_cast<int>(values_.size()); }
  /// rho(j) for k+1 <= j <= k+r.
  int operator()(int j) const { return values_.at(std::size_t(j - k_ - 1)); }
  const std::vector<int>& values() const noexcept { return values_; }
  bool is_upper_echelon() const noexcept;
  /// "rho(k+1),...,rho(k+r)" joined by '-'.
  std::string encode() const;

  friend bool operator==(const CollisionMap&, const CollisionMap&) = default;
  friend auto operator<=>(const CollisionMap&, const CollisionMap&) = default;

 private:
  int k_;
  std::vector<int> values_;
};

inline constexpr int kMaxBoardSize = 12;

/// All maps in lexicographic order of (rho(k+1), ..., rho(k+r)).
/// Throws ConfigError when k+r exceeds kMaxBoardSize.
std::vector<CollisionMap> enumerate_collision_maps(int k, int r);
/// prod_{l=1}^r (k+l-1).
std::size_t collision_map_count(int k, int r);

/// The acceptable move at column j (k+1 <= j < k+r): legal when
/// rho(j+1) < rho(j); conjugates rho by the transposition (j j+1), which
/// exchanges the time variables t_{j-k} and t_{j-k+1}.
bool move_is_acceptable(const CollisionMap& rho, int j);
CollisionMap apply_move(const CollisionMap& rho, int j);

struct Reduction {
  CollisionMap sigma;
  /// J(rho; t_1..t_r) = J(sigma; s_1..s_r) with s_i = t_{time_perm[i]} (0-based).
  std::vector<int> time_perm;
  int moves = 0;
};
/// Applies the leftmost acceptable move until none is left.
Reduction reduce_to_echelon(const CollisionMap& rho);

struct EchelonClass {
  CollisionMap representative;
  std::vector<std::size_t> members;  ///< indices into EchelonPartition::maps
  int monotone_members = 0;
};

struct EchelonPartition {
  int k = 0, r = 0;
  std::vector<CollisionMap> maps;
  std::vector<EchelonClass> classes;
  std::vector<std::size_t> class_of;
};

/// Classes of the transitive closure of acceptable moves (union-find over
/// all maps). Throws ConfigError when k+r exceeds kMaxBoardSize.
EchelonPartition upper_echelon_classes(int k, int r);

/// Vertex reference in a forest: internal v_l (l = 1..r) or leaf u_i (i = 1..k+r).
struct Vertex {
  enum class Kind { internal, leaf } kind;
  int index;
  friend bool operator==(const Vertex&, const Vertex&) = default;
  std::string name() const;
};

struct InternalVertex {
  int label;            ///< l: v_l carries B_{sigma(k+l), k+l} and time t_l
  Vertex kept;          ///< child on the sigma(k+l) side (kappa_-)
  Vertex traced;        ///< child on the k+l side (kappa_+)
  int tree = 0;         ///< 1-based root index
};

struct Tree {
  int root = 0;                   ///< j: root w_j
  Vertex top;                     ///< child of w_j
  std::vector<int> labels;        ///< l_{j,1} < ... < l_{j,m_j}
  std::vector<int> leaves;        ///< leaf indices i
  bool distinguished = false;
  /// Internal echelon map: internal[a-1] = sigma_j(a+1), a = 1..m_j.
  std::vector<int> internal_map;
};

struct TreeForest {
  int k = 0, r = 0;
  std::vector<InternalVertex> internal;  ///< internal[l-1] is v_l
  std::vector<Tree> trees;               ///< trees[j-1] rooted at w_j
  std::vector<int> leaf_parent;          ///< leaf_parent[i-1]: 0 for a root, else l
  bool echelon = true;                   ///< built from an upper echelon map

  int distinguished_tree() const;
  /// Graphviz text with vertices named w_j, v_l, u_i; the distinguished tree in bold.
  std::string to_dot() const;
};

/// Builds the forest by following the data flow of the operator chain from the
/// last collision to the first. Non-echelon maps are accepted and marked
/// (echelon = false); for them kept < traced need not hold.
TreeForest build_tree_graph(const CollisionMap& sigma);

/// The map sigma(4)=1, sigma(5)=2, sigma(6)=3, sigma(7)=4, sigma(8)=6 (k=3, r=5).
CollisionMap worked_example_map();

}  // namespace gph
