#pragma once

#include <stdexcept>
#include <string>

namespace cvbandit {

// Side-information carries no spread around its centering point, so the
// control-variate coefficient is undefined.
class DegenerateSideInfo : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class InsufficientSamples : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// The multi side-information normal equations are numerically singular.
class SingularSideInfo : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Configuration failed validation. path() names the offending field,
// e.g. "arms[2].rho".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message),
          path_(std::move(path)),
          message_(message) {}

    const std::string& path() const noexcept { return path_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string path_;
    std::string message_;
};

} // namespace cvbandit
