// errors.hpp -- exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace latticelab {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct MixedTimeKinds : Error {
    explicit MixedTimeKinds(const std::string& msg = "walks have different time kinds") : Error(msg) {}
};

struct RankDeficient : Error {
    explicit RankDeficient(const std::string& msg = "step support does not span a rank-2 lattice") : Error(msg) {}
};

struct DegenerateCovariance : Error {
    explicit DegenerateCovariance(const std::string& msg = "covariance matrix is singular") : Error(msg) {}
};

struct GridTooLarge : Error {
    explicit GridTooLarge(const std::string& msg = "requested kernel grid exceeds configured cap") : Error(msg) {}
};

struct HorizonExceeded : Error {
    explicit HorizonExceeded(const std::string& msg = "requested time exceeds environment horizon") : Error(msg) {}
};

struct InsufficientEnvironments : Error {
    explicit InsufficientEnvironments(const std::string& msg = "variance across environments needs at least 2 environments")
        : Error(msg) {}
};

struct BoxTooSmall : Error {
    explicit BoxTooSmall(const std::string& msg = "box does not cover the reachable set") : Error(msg) {}
};

struct BoundaryMassExceeded : Error {
    explicit BoundaryMassExceeded(const std::string& msg = "boundary mass diagnostic above threshold; enlarge the box")
        : Error(msg) {}
};

struct ConfigInvalid : Error {
    explicit ConfigInvalid(const std::string& msg) : Error(msg) {}
};

struct ManifestCorrupt : Error {
    explicit ManifestCorrupt(const std::string& msg) : Error(msg) {}
};

} // namespace latticelab
