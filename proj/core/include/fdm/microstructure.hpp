#pragma once

#include <cstdint>
#include <vector>

#include "fdm/grid.hpp"

namespace fdm {

/// Initial layer distortion generators. Loop kinds build a plateau whose
/// height amplitude * width carries the Burgers content spread over the
/// dislocation width; random kinds are normalized to a target max ||alpha||
/// with zero mean.
struct MicrostructureSpec {
    enum class Kind {
        CircularLoop,
        PolygonalLoop,
        HalfSquareWaves1D,
        RandomNoisy,
        RandomSmoothed,
    };

    Kind kind = Kind::CircularLoop;

    double amplitude = 1e-2;  ///< dimensionless ||alpha||: b/S0 spread density
    double width = 10.0;      ///< dislocation spreading width, units of b

    // circular loop
    double radius = 60.0;

    // polygonal loop: regular polygon (4 = square aligned with the axes)
    int vertices = 4;
    double half_edge = 40.0;   ///< half edge length for the square
    double rotation = 0.0;     ///< radians

    // 1D half-square waves: front center positions along x1
    double front_left = 50.0;
    double front_right = 270.0;

    // random kinds
    std::uint64_t seed = 1;
    double smoothing_length = 10.0;  ///< Gaussian cutoff wavelength, units of b

    void validate(const GridSpec& grid) const;
};

/// Builds phi = U^p_13 on the given 2D layer grid.
ScalarField make_microstructure(const MicrostructureSpec& spec, const GridSpec& grid);

}  // namespace fdm
