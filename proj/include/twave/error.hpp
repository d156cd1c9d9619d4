#pragma once

#include <stdexcept>
#include <string>

namespace twave {

enum class ErrorKind {
    structural,   // dimensions disagree
    parameter,    // value outside its admissible range
    config,       // malformed or inconsistent run configuration
    subcritical,  // wave speed below the model threshold
    equilibrium,  // positive equilibrium does not exist
    domain,       // profile left the [0, K] box
    integrity,    // sweep broke the sandwich ordering
    index,
    domain_too_small,
    blow_up,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::structural: return "structural";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::config: return "config";
    case ErrorKind::subcritical: return "subcritical";
    case ErrorKind::equilibrium: return "equilibrium";
    case ErrorKind::domain: return "domain";
    case ErrorKind::integrity: return "integrity";
    case ErrorKind::index: return "index";
    case ErrorKind::domain_too_small: return "domain-too-small";
    case ErrorKind::blow_up: return "blow-up";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

    // Errors the user can fix by editing the configuration map to exit code 2.
    bool is_config_error() const noexcept {
        switch (kind_) {
        case ErrorKind::structural:
        case ErrorKind::parameter:
        case ErrorKind::config:
        case ErrorKind::subcritical:
        case ErrorKind::equilibrium:
        case ErrorKind::index:
        case ErrorKind::domain_too_small:
            return true;
        default:
            return false;
        }
    }

private:
    ErrorKind kind_;
};

} // namespace twave
