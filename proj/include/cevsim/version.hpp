#ifndef CEVSIM_VERSION_HPP
#define CEVSIM_VERSION_HPP

namespace cevsim {

inline constexpr const char* kVersion = "0.1.0";

} // namespace cevsim

#endif // CEVSIM_VERSION_HPP
