#pragma once

#include "stirlab/vec.hpp"

#include <limits>

namespace stirlab
{
    /// R^d (edge == infinity) or the flat torus R^d / (edge Z^d).
    struct Space
    {
        int dim = 2;
        double edge = std::numeric_limits<double>::infinity();

        static Space euclidean(int d) { return Space{d, std::numeric_limits<double>::infinity()}; }
        static Space torus(int d, double r) { return Space{d, r}; }

        bool finite() const { return std::isfinite(edge); }
        /// Throws unless d in [2, kMaxDim] and a finite edge exceeds 4.
        void validate() const;
    };

    /// Torus point lifted to R^d. `coords` is congruent to `origin_ref`
    /// modulo the edge; on R^d the two coincide.
    struct UnfoldedPoint
    {
        Vec coords;
        Vec origin_ref;
    };

    /// Canonical torus representative, every coordinate in [0, r).
    Vec wrap(const Vec &p, const Space &space);

    /// Canonical point for either space: wrap on a torus, identity on R^d.
    Vec canonical(const Vec &p, const Space &space);

    /// Minimal-norm v with a + v == b (mod r); components in (-r/2, r/2].
    Vec displacement(const Vec &a, const Vec &b, const Space &space);

    double distance(const Vec &a, const Vec &b, const Space &space);

    /// Unit outward normal of the sphere around `center` at `p`.
    Vec outward_normal(const Vec &center, const Vec &p, const Space &space);

    /// Extends a lifted path by the minimal move to `new_torus`.
    UnfoldedPoint unfold_step(const UnfoldedPoint &prev, const Vec &new_torus, const Space &space);
} // namespace stirlab
