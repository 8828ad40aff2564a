#include "stirlab/geometry.hpp"

#include "stirlab/error.hpp"

#include <cmath>
#include <string>

namespace stirlab
{
    void Space::validate() const
    {
        if (dim < 2 || dim > kMaxDim)
            throw Error("dimension must lie in [2, " + std::to_string(kMaxDim) + "]");
        if (finite() && !(edge > 4.0))
            throw Error("torus edge must exceed 4");
        if (std::isnan(edge))
            throw Error("torus edge is NaN");
    }

    Vec wrap(const Vec &p, const Space &space)
    {
        if (!space.finite())
            throw Error("wrap requires a finite torus");
        const double r = space.edge;
        Vec out(p.dim);
        for (int i = 0; i < p.dim; ++i)
        {
            double x = p[i] - r * std::floor(p[i] / r);
            // floor can leave x == r after rounding of tiny negatives
            if (x >= r || x < 0.0)
                x = 0.0;
            out[i] = x;
        }
        return out;
    }

    Vec canonical(const Vec &p, const Space &space)
    {
        return space.finite() ? wrap(p, space) : p;
    }

    Vec displacement(const Vec &a, const Vec &b, const Space &space)
    {
        Vec v = b - a;
        if (!space.finite())
            return v;
        const double r = space.edge;
        for (int i = 0; i < v.dim; ++i)
            v[i] -= r * std::ceil(v[i] / r - 0.5);
        return v;
    }

    double distance(const Vec &a, const Vec &b, const Space &space)
    {
        return displacement(a, b, space).norm();
    }

    Vec outward_normal(const Vec &center, const Vec &p, const Space &space)
    {
        Vec v = displacement(center, p, space);
        const double n = v.norm();
        if (!(n > 0.0))
            throw Error("degenerate normal");
        return v * (1.0 / n);
    }

    UnfoldedPoint unfold_step(const UnfoldedPoint &prev, const Vec &new_torus, const Space &space)
    {
        const Vec step = displacement(prev.origin_ref, new_torus, space);
        if (space.finite())
        {
            const double half = 0.5 * space.edge;
            for (int i = 0; i < step.dim; ++i)
                if (std::abs(step[i]) >= half)
                    throw Error("unfolding ambiguity");
        }
        return UnfoldedPoint{prev.coords + step, new_torus};
    }
} // namespace stirlab
