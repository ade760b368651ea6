#ifndef SOLVFRAME_EXAMPLEGROUPS_HPP
#define SOLVFRAME_EXAMPLEGROUPS_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "algebra.hpp"

namespace solvframe {

/// Builtin example gallery. Every group is completely solvable of the
/// form G = P x| M with the A-basis in strong Malcev order, and ships
/// with a lambda for which the induced representation machinery is in
/// general position.
inline std::vector<std::string> builtin_names() {
  return {"affine",  "toeplitz", "toeplitz3", "heisenberg",
          "highertf", "solvext",  "toy3d",     "example5d"};
}

inline GroupSpec builtin_spec(const std::string& name) {
  auto sym = [](std::vector<BracketEntry> half) {
    std::vector<BracketEntry> full;
    for (const auto& e : half) {
      full.push_back(e);
      full.push_back({e.j, e.i, e.k, -e.c});
    }
    return full;
  };

  if (name == "affine") {
    // ax+b group: [A1, X1] = X1, lambda = X1*.
    return make_group_spec(1, 1, sym({{2, 1, 1, 1.0}}), {1.0}, CommutativeClass{});
  }
  if (name == "toeplitz") {
    // Toeplitz shearlet group, n1 = n2 = 2:
    // ad(t1 A1 + t2 A2)|_p = [[t2, t1], [0, t2]].
    return make_group_spec(2, 2,
                           sym({{3, 2, 1, 1.0},   // [A1, X2] = X1
                                {4, 1, 1, 1.0},   // [A2, X1] = X1
                                {4, 2, 2, 1.0}}), // [A2, X2] = X2
                           {1.0, 0.0}, CommutativeClass{});
  }
  if (name == "toeplitz3") {
    // Same family with n1 = n2 = 3:
    // ad(t)|_p = [[t3, t1, t2], [0, t3, t1], [0, 0, t3]].
    return make_group_spec(3, 3,
                           sym({{4, 2, 1, 1.0},   // [A1, X2] = X1
                                {4, 3, 2, 1.0},   // [A1, X3] = X2
                                {5, 3, 1, 1.0},   // [A2, X3] = X1
                                {6, 1, 1, 1.0},   // [A3, Xk] = Xk
                                {6, 2, 2, 1.0},
                                {6, 3, 3, 1.0}}),
                           {1.0, 0.0, 0.0}, CommutativeClass{});
  }
  if (name == "heisenberg") {
    // Step-two nilpotent: X1 central, [A1, X2] = X1, lambda = X1*
    // (det B(lambda) = lambda_1 != 0).
    return make_group_spec(2, 1, sym({{3, 2, 1, 1.0}}), {1.0, 0.0}, CommutativeClass{});
  }
  if (name == "highertf") {
    // Higher-order time-frequency group, n1 = 3, n2 = 2:
    // N(t) = [[0, t1, t2], [0, 0, t1], [0, 0, 0]], lambda = X1*.
    return make_group_spec(3, 2,
                           sym({{4, 2, 1, 1.0},   // [A1, X2] = X1
                                {4, 3, 2, 1.0},   // [A1, X3] = X2
                                {5, 3, 1, 1.0}}), // [A2, X3] = X1
                           {1.0, 0.0, 0.0}, CommutativeClass{});
  }
  if (name == "solvext") {
    // Solvable extension of R^3 by a single Jordan block with
    // eigenvalue 1: ad(A1)|_p = J_3(1).
    return make_group_spec(3, 1,
                           sym({{4, 1, 1, 1.0},   // [A1, X1] = X1
                                {4, 2, 1, 1.0},   // [A1, X2] = X1 + X2
                                {4, 2, 2, 1.0},
                                {4, 3, 2, 1.0},   // [A1, X3] = X2 + X3
                                {4, 3, 3, 1.0}}),
                           {1.0, 0.0, 0.0}, CommutativeClass{});
  }
  if (name == "toy3d") {
    // Three-dimensional toy group with ad(a A1)|_p = [[a, a], [0, a]],
    // i.e. [A1, X1] = X1 and [A1, X2] = X1 + X2, lambda = X1*.
    return make_group_spec(2, 1,
                           sym({{3, 1, 1, 1.0},
                                {3, 2, 1, 1.0},
                                {3, 2, 2, 1.0}}),
                           {1.0, 0.0}, CommutativeClass{});
  }
  if (name == "example5d") {
    // Five-dimensional group whose orbital data admits two charts,
    // beta_(1,2)(t) = (e^{-t2}, e^{-t2}(t1 - 1)) and
    // beta_(2,3)(t) = (e^{-t2}(t1 - 1), e^{2 t2}).
    return make_group_spec(3, 2,
                           sym({{4, 2, 1, -1.0},  // [A1, X2] = -X1
                                {5, 1, 1, 1.0},   // [A2, X1] = X1
                                {5, 2, 2, 1.0},   // [A2, X2] = X2
                                {5, 3, 3, -2.0}}),// [A2, X3] = -2 X3
                           {1.0, -1.0, 1.0}, CommutativeClass{});
  }
  throw std::invalid_argument("unknown builtin example '" + name + "'");
}

}  // namespace solvframe

#endif
