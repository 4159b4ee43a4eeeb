#ifndef PSS_DEFAULTS_HPP
#define PSS_DEFAULTS_HPP

#include <cstddef>

// Default tolerances. The CLI config overrides every one of these.
namespace pss::defaults {

inline constexpr double gate_factor = 10.0;
inline constexpr double nondegeneracy = 1e-8;
inline constexpr double orthogonality = 1e-10;
inline constexpr std::size_t hierarchy_order_cap = 6;
inline constexpr double order_floor = 1.7;
inline constexpr double blowup_factor = 50.0;

} // namespace pss::defaults

#endif // PSS_DEFAULTS_HPP
