#pragma once

#include <stdexcept>
#include <string>

namespace heliosim {

// Parameter search exhausted its iteration budget.
struct ParameterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bounded discrete-log search found no plaintext in range; the board
// contents no longer decrypt to a plausible tally.
struct DecryptionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RegistrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AuthenticationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation attempted in the wrong election phase (double close, tally
// before close, ...).
struct PhaseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad hold/release usage: unknown handle, double release.
struct AdversaryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Delivery budget exceeded while draining the network.
struct LivelockError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Trace missing events a predicate needs (e.g. no tally record).
struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace heliosim
