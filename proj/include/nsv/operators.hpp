#pragma once

#include <optional>
#include <vector>

#include "nsv/spectral_field.hpp"

namespace nsv {

/// Leray-Helmholtz projection onto divergence-free fields: u_k -= (k.u_k / |k|^2) k.
SpectralField leray_project(const SpectralField& u);

/// Stokes operator power A^s, the per-mode multiplier lambda(k)^s.
SpectralField stokes_apply(const SpectralField& u, double s);

/// (I + alpha^2 A)^-1, the per-mode multiplier 1 / (1 + alpha^2 lambda(k)).
SpectralField helmholtz_inverse(const SpectralField& u, double alpha);

/// B(u, v) = P((u.grad) v), evaluated pseudo-spectrally in convective form on
/// the grid, then dealiased and projected. For inputs inside the dealias mask
/// this is the exact Galerkin-truncated convolution.
SpectralField bilinear_B(const SpectralField& u, const SpectralField& v);

/// B(u, u) through the divergence form P(div(u u^T)); same truncated triads as
/// bilinear_B(u, u) for divergence-free u, with 9 transforms instead of 15.
SpectralField advect_self(const SpectralField& u);
/// advect_self writing into an existing field on the same lattice.
void advect_self_into(const SpectralField& u, SpectralField& out);

/// b(u, v, w) = (B(u, v), w).
double trilinear_b(const SpectralField& u, const SpectralField& v, const SpectralField& w);

/// Keeps modes with band.lo <= sqrt(lambda) < band.hi.
SpectralField band_project(const SpectralField& u, const ShellBand& band);

/// E(n) = 1/2 sum_{round(|k|) = n} |u_k|^2, with |k| the integer wavevector length.
/// Index 0 is always zero (the mean is excluded).
std::vector<double> energy_spectrum(const SpectralField& u);

/// (sum_k |u_k|^2 |k|^{2r} e^{2 tau |k|})^{1/2} with |k| = sqrt(lambda).
/// Returns nullopt when a term (or the sum) is not representable.
std::optional<double> gevrey_norm(const SpectralField& u, double r, double tau);

/// Enstrophy-like norms used throughout: ||u||^2 = (A u, u), |A u|^2.
double h1_norm2(const SpectralField& u);
double stokes_norm2(const SpectralField& u);

/// Physical-space samples of the three components (N^3 each, row-major x,y,z).
std::array<std::vector<double>, 3> to_physical(const SpectralField& u);
SpectralField from_physical(LatticePtr lattice, const std::array<std::vector<double>, 3>& values);

}  // namespace nsv
