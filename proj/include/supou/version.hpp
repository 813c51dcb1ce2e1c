#ifndef SUPOU_VERSION_HPP
#define SUPOU_VERSION_HPP

namespace supou {

inline constexpr const char* version_string = "0.1.0";

} // namespace supou

#endif // SUPOU_VERSION_HPP
