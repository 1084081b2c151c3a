#pragma once

// Built-in model factories.

#include "cyclofeed/model.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace cyclofeed {

/// x1' = a1 - a2 x1 x4, x2' = a3 x1 - a4 x2, x3' = a5 x2 - a6 x3,
/// x4' = a7 x3 - a8 x1 x4 on the closed positive orthant. All a_i > 0.
ModelSpec antithetic_controller(const std::array<double, 8>& a = {1, 1, 1, 1, 1, 1, 1, 1});

/// Coefficients of the four-species periodic Lotka-Volterra chain
///
///   x1' = x1 (g1 - a11 x1 - a14 x4)
///   x2' = x2 (g2 + a21 x1 - a22 x2 + a23 x3)
///   x3' = x3 (g3 + a32 x2 - a33 x3 + a34 x4)
///   x4' = x4 (g4 + a43 x3 - a44 x4)
///
/// each given as an expression in t alone.
struct LotkaVolterraCoefficients {
    std::array<std::string, 4> g;
    std::string a11, a14, a21, a22, a23, a32, a33, a34, a43, a44;
    double period = 1.0;

    /// g_i = 1 + 0.2 sin(2 pi t), a_ii = 1, off-diagonal 0.5. Not dissipative.
    static LotkaVolterraCoefficients uniform();
    /// Dissipative set whose interior equilibrium is oscillatory; its Poincare
    /// map has a nontrivial attractor.
    static LotkaVolterraCoefficients oscillating();
};

/// Rejects (DomainError) coefficients that depend on anything but t, or that
/// are not positive at 257 sample times in [0, T]. a14 may vanish identically.
ModelSpec periodic_lotka_volterra(const LotkaVolterraCoefficients& c, const std::string& name = "lotka-volterra");

/// Random cyclic linear system with the 2-positive sign pattern: positive
/// sub-diagonal cycle with a negative corner a_1n, nonnegative super-diagonal
/// with a nonpositive corner a_n1. The diagonal is shifted by the dominant
/// Floquet exponent so that solutions neither grow nor decay. With `periodic`
/// each off-diagonal entry carries a factor 1 + 0.5 sin(2 pi t + phase).
ModelSpec random_two_positive_linear(int n, bool periodic, std::uint64_t seed);

/// Built-in models by name.
std::vector<std::string> builtin_names();
bool is_builtin(const std::string& name);
ModelSpec builtin_model(const std::string& name);

} // namespace cyclofeed
