#pragma once

namespace qlocksim {

/// Elementary charge [C] (exact SI value).
inline constexpr double kElementaryCharge = 1.602176634e-19;

/// Boltzmann constant [J/K] (exact SI value).
inline constexpr double kBoltzmann = 1.380649e-23;

}  // namespace qlocksim
