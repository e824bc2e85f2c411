#include "mflab/errors.hpp"

#include <sstream>

namespace mflab {

namespace {
std::string describe_collision(std::size_t i, std::size_t j, double distance)
{
    std::ostringstream os;
    os << "particles " << i << " and " << j << " collided (distance " << distance << ")";
    return os.str();
}

std::string describe_cfl(double requested, double allowed)
{
    std::ostringstream os;
    os << "time step " << requested << " exceeds CFL limit " << allowed;
    return os.str();
}
} // namespace

CollisionError::CollisionError(std::size_t i, std::size_t j, double distance)
    : Error(describe_collision(i, j, distance)), first_(i), second_(j), distance_(distance)
{
}

IntegratorError::IntegratorError(const std::string& what, double time)
    : Error(what + " (t=" + std::to_string(time) + ")"), time_(time)
{
}

CflError::CflError(double requested_dt, double allowed_dt)
    : Error(describe_cfl(requested_dt, allowed_dt)), requested_(requested_dt), allowed_(allowed_dt)
{
}

ShockError::ShockError(const std::string& what, double time)
    : Error(what + " (t=" + std::to_string(time) + ")"), time_(time)
{
}

ConfigError::ConfigError(std::string path, const std::string& what)
    : Error(path.empty() ? what : path + ": " + what), path_(std::move(path))
{
}

SchemaError::SchemaError(const std::string& what, std::size_t line, const std::string& file)
    : Error((file.empty() ? "" : file + ": ") + what + (line ? " (line " + std::to_string(line) + ")" : ""))
    , message_(what)
    , line_(line)
{
}

} // namespace mflab
