#pragma once

#include <stdexcept>
#include <string>

namespace hitstats {

struct InvalidSpec : std::runtime_error {
    explicit InvalidSpec(const std::string& what) : std::runtime_error(what) {}
};

struct Escaped : std::runtime_error {
    explicit Escaped(const std::string& what) : std::runtime_error(what) {}
};

struct SeedExhausted : std::runtime_error {
    explicit SeedExhausted(const std::string& what) : std::runtime_error(what) {}
};

struct Tangency : std::runtime_error {
    explicit Tangency(const std::string& what) : std::runtime_error(what) {}
};

struct NoIntersection : std::runtime_error {
    explicit NoIntersection(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateTarget : std::runtime_error {
    explicit DegenerateTarget(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientGrid : std::runtime_error {
    explicit InsufficientGrid(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientSamples : std::runtime_error {
    explicit InsufficientSamples(const std::string& what) : std::runtime_error(what) {}
};

struct AllCensored : std::runtime_error {
    explicit AllCensored(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hitstats
