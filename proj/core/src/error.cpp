#include "vemstokes/error.hpp"

namespace vemstokes {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Mesh: return "mesh";
    case ErrorKind::Assembly: return "assembly";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

} // namespace vemstokes
