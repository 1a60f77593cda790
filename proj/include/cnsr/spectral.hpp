#pragma once

#include <array>

#include "cnsr/field.hpp"

namespace cnsr {

enum class Dealias { apply, skip };

using SpectralVector = std::array<SpectralField, 3>;

SpectralVector to_spectral(const VectorField& v);
VectorField to_physical(const SpectralVector& v);

// Fourier-multiplier operators. Inputs are never modified.

/// Spectral gradient; by default the 2/3 mask is applied to the result.
VectorField gradient(const ScalarField& f, Dealias dealias = Dealias::apply);
/// d/dx_axis with the Nyquist mode dropped.
ScalarField derivative(const ScalarField& f, int axis, Dealias dealias = Dealias::skip);
ScalarField divergence(const VectorField& v, Dealias dealias = Dealias::skip);
ScalarField laplacian(const ScalarField& f);
ScalarField dealias(const ScalarField& f);

/// exp(nu * t * Laplacian) f.
ScalarField heat_propagate(const ScalarField& f, double t, double nu = 1.0);
/// Periodic Gaussian mollifier, multiplier exp(-eps^2 |k|^2 / 2).
ScalarField mollify(const ScalarField& f, double eps);
VectorField mollify(const VectorField& v, double eps);
/// L2-orthogonal projection onto divergence-free fields; identity on the mean.
VectorField leray_project(const VectorField& v);
/// (-Laplacian)^s for s in (0, 1]; the mean maps to zero.
ScalarField frac_laplacian(const ScalarField& f, double s);

namespace spectral {

void apply_mask(SpectralField& f);
void apply_heat(SpectralField& f, double t, double nu = 1.0);
void apply_mollifier(SpectralField& f, double eps);
void apply_leray(SpectralVector& v);
/// Multiplies by |k|^{2s}.
void apply_frac_laplacian(SpectralField& f, double s);
/// Returns i k_axis fhat (Nyquist dropped).
SpectralField derivative(const SpectralField& f, int axis);
/// Returns i k . vhat.
SpectralField divergence(const SpectralVector& v);

/// Box integral of f*g for real fields given by their coefficients (Parseval).
double inner(const SpectralField& f, const SpectralField& g);
/// Box integral of |k|^{2 power} |fhat|^2, i.e. ||(-Laplacian)^{power/2} f||^2.
double weighted_norm_sq(const SpectralField& f, double power);

}  // namespace spectral

}  // namespace cnsr
