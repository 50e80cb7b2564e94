#pragma once

#include <utility>
#include <vector>

#include "latdisc/errors.hpp"
#include "latdisc/fp_linalg.hpp"

namespace latdisc {

// X + X^T = M and X_kk + sum_l X_kl z_l = b_k over F_2.
struct SymSystem {
  int r = 0;
  FpMatrix M{2, 0, 0};
  Vec z;
  Vec b;
};

struct SymSolution {
  FpMatrix particular;
  std::vector<FpMatrix> kernel;
};

inline bool satisfies(const SymSystem& s, const FpMatrix& X) {
  for (int k = 0; k < s.r; ++k) {
    for (int l = 0; l < s.r; ++l)
      if (((X(k, l) + X(l, k)) & 1) != (s.M(k, l) & 1)) return false;
    int acc = X(k, k);
    for (int l = 0; l < s.r; ++l) acc += X(k, l) * s.z[l];
    if ((acc & 1) != (s.b[k] & 1)) return false;
  }
  return true;
}

namespace detail {

// Solves the permuted system where the first e coordinates carry z = 1.
class PermutedSolver {
 public:
  PermutedSolver(const SymSystem& s) : r_(s.r) {
    for (int k = 0; k < r_; ++k)
      if (s.z[k] & 1) perm_.push_back(k);
    e_ = static_cast<int>(perm_.size());
    for (int k = 0; k < r_; ++k)
      if (!(s.z[k] & 1)) perm_.push_back(k);
  }

  int free_count() const { return r_ * (r_ - 1) / 2 + (e_ > 0 ? 1 : 0); }

  // Free variables in order: upper entries that are not pivots, then diagonal entries of the z = 1 part.
  std::vector<std::pair<int, int>> free_variables() const {
    std::vector<std::pair<int, int>> out;
    for (int k = 0; k < r_; ++k)
      for (int l = k + 1; l < r_; ++l)
        if (!(l == k + 1 && l < e_)) out.emplace_back(k, l);
    for (int k = 0; k < e_; ++k) out.emplace_back(k, k);
    return out;
  }

  FpMatrix solve(const SymSystem& s, const Vec& free_values) const {
    FpMatrix M(2, r_, r_);
    Vec b(r_);
    for (int i = 0; i < r_; ++i) {
      b[i] = s.b[perm_[i]] & 1;
      for (int j = 0; j < r_; ++j) M.at(i, j) = s.M(perm_[i], perm_[j]) & 1;
    }
    FpMatrix X(2, r_, r_);
    auto fv = free_variables();
    for (size_t t = 0; t < fv.size(); ++t) X.at(fv[t].first, fv[t].second) = free_values[t] & 1;
    // Prefix-summed equations determine X_{m,m+1} inside the z = 1 part.
    for (int m = 0; m + 1 < e_; ++m) {
      int rhs = 0;
      for (int k = 0; k <= m; ++k) {
        rhs ^= b[k];
        for (int l = 0; l < k; ++l) rhs ^= M(k, l);
      }
      for (int k = 0; k <= m; ++k)
        for (int l = m + 1; l < e_; ++l)
          if (!(k == m && l == m + 1)) rhs ^= X(k, l);
      X.at(m, m + 1) = rhs;
    }
    for (int k = 0; k < r_; ++k)
      for (int l = k + 1; l < r_; ++l) X.at(l, k) = (M(k, l) + X(k, l)) & 1;
    for (int k = e_; k < r_; ++k) {
      int acc = b[k];
      for (int l = 0; l < e_; ++l) acc ^= X(k, l);
      X.at(k, k) = acc;
    }
    FpMatrix out(2, r_, r_);
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < r_; ++j) out.at(perm_[i], perm_[j]) = X(i, j);
    return out;
  }

 private:
  int r_;
  int e_ = 0;
  std::vector<int> perm_;
};

}  // namespace detail

inline SymSolution solve(const SymSystem& s) {
  require(s.M.rows() == s.r && s.M.cols() == s.r && static_cast<int>(s.z.size()) == s.r &&
              static_cast<int>(s.b.size()) == s.r,
          ErrorKind::PreconditionViolation, "system dimensions disagree");
  for (int k = 0; k < s.r; ++k)
    for (int l = 0; l < k; ++l)
      require((s.M(k, l) & 1) == (s.M(l, k) & 1), ErrorKind::PreconditionViolation, "M is not symmetric");
  for (int k = 0; k < s.r; ++k)
    if (s.M(k, k) & 1) fail(ErrorKind::NoSolution, "nonzero-diagonal");
  int parity = 0;
  for (int k = 0; k < s.r; ++k) {
    parity ^= (s.z[k] & s.b[k]) & 1;
    for (int l = 0; l < k; ++l) parity ^= (s.z[k] & s.z[l] & s.M(k, l)) & 1;
  }
  if (parity) fail(ErrorKind::NoSolution, "parity-obstruction");

  detail::PermutedSolver solver(s);
  int nf = solver.free_count();
  SymSolution out;
  out.particular = solver.solve(s, Vec(nf, 0));
  SymSystem hom = s;
  hom.M = FpMatrix(2, s.r, s.r);
  hom.b = Vec(s.r, 0);
  for (int t = 0; t < nf; ++t) {
    Vec fv(nf, 0);
    fv[t] = 1;
    out.kernel.push_back(solver.solve(hom, fv));
  }
  require(satisfies(s, out.particular), ErrorKind::InternalError, "particular solution fails the system");
  return out;
}

}  // namespace latdisc
