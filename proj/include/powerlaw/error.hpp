#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace powerlaw {

/// Base class for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inadmissible input data (panel files, specs, arguments).
class InputError : public Error {
public:
    enum class Kind {
        MissingCell,
        NonPositiveValue,
        DuplicatePeriod,
        TooFewEntities,
        TooFewPeriods,
        Parse,
        InvalidSpec,
        NegativeGap,
        EmptyRankSet,
        InvalidArgument,
    };

    InputError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Partial sum of relative growth rates is not strictly negative at `rank`
/// (1-based), so no stationary distribution exists.
class StationarityViolation : public Error {
public:
    explicit StationarityViolation(std::size_t rank, const std::string& what)
        : Error(what), rank_(rank) {}

    std::size_t rank() const noexcept { return rank_; }

private:
    std::size_t rank_;
};

/// Every candidate smoothing pass count produced a stationarity violation.
class NoStationaryPrediction : public Error {
public:
    using Error::Error;
};

} // namespace powerlaw
