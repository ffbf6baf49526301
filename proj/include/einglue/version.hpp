#pragma once

#define EINGLUE_VERSION "0.1.0"

namespace einglue {
inline const char* version() { return EINGLUE_VERSION; }
}
