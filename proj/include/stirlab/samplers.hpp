#pragma once

#include "stirlab/rng.hpp"
#include "stirlab/vec.hpp"

#include <optional>

namespace stirlab
{
    /// Angle increment with circular density (1-rho^2)/(1+rho^2-2 rho cos w)
    /// against dw/(2 pi) (wrapped Cauchy), by exact inverse CDF. 0 <= rho < 1.
    double sample_wrapped_cauchy(double rho, Rng &rng);

    /// Exit point on the unit sphere of Brownian motion started at `x`
    /// (|x| < 1): the Poisson kernel (1-|x|^2)/|z-x|^d. Exact. In d = 2 this is
    /// the wrapped Cauchy law; for d >= 3 the proposal is the exit point of a
    /// uniformly oriented ray from x, accepted with probability
    /// (1-|x|)/(1-z.x), which is at least 1/2 on average.
    Vec sample_ball_harmonic(const Vec &x, Rng &rng);

    /// Brownian motion at `rel` (relative to a sphere center, |rel| > radius)
    /// either hits the sphere of the given radius or escapes. Returns the hit
    /// point (relative to the center) or nullopt on escape. Hit probability is
    /// (radius/|rel|)^(d-2); the conditional law is the interior Poisson kernel
    /// from the Kelvin image radius^2 rel/|rel|^2.
    std::optional<Vec> exterior_return(const Vec &rel, double radius, Rng &rng);
} // namespace stirlab
