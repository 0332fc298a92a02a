//! Reference computations for the test suites. Each oracle is coded
//! without the production algorithms it checks: direct trigonometric sums
//! instead of transforms, finite differences instead of Fourier blocks,
//! brute-force scans instead of sweeps.

pub mod field_quadrature;
pub mod torus_fd;
pub mod random_fields;
pub mod lagrangian;
pub mod segments;
pub mod neck_exact;
