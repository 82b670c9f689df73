#pragma once

#include <stdexcept>
#include <string>

namespace ofnav {

struct NoIntersectionError : std::runtime_error {
    explicit NoIntersectionError(const std::string& what) : std::runtime_error(what) {}
};

struct NoFeaturesError : std::runtime_error {
    explicit NoFeaturesError(const std::string& what) : std::runtime_error(what) {}
};

struct ImageTooSmallError : std::runtime_error {
    explicit ImageTooSmallError(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientFeaturesError : std::runtime_error {
    explicit InsufficientFeaturesError(const std::string& what) : std::runtime_error(what) {}
};

struct RankDeficientError : std::runtime_error {
    explicit RankDeficientError(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidScenarioError : std::runtime_error {
    explicit InvalidScenarioError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ofnav
