#ifndef TSMCD_VERSION_HPP
#define TSMCD_VERSION_HPP

namespace tsmcd {

inline constexpr const char* version = "0.1.0";

}

#endif
