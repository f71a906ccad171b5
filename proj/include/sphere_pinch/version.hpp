#ifndef SPHERE_PINCH_VERSION_HPP
#define SPHERE_PINCH_VERSION_HPP

namespace sphere_pinch {
inline constexpr const char* kVersion = "0.3.0";
}

#endif // SPHERE_PINCH_VERSION_HPP
