// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pwe {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define PWE_DEFINE_ERROR(Name)                                        \
    struct Name : Error {                                             \
        explicit Name(const std::string& what) : Error(what) {}       \
    }

// geometry
PWE_DEFINE_ERROR(ZeroAreaSurface);
PWE_DEFINE_ERROR(SideLengthNonPositive);
PWE_DEFINE_ERROR(DegeneratePoints);

// em core
PWE_DEFINE_ERROR(MismatchedCellCount);
PWE_DEFINE_ERROR(EmptyFunctionList);
PWE_DEFINE_ERROR(UnknownPort);
PWE_DEFINE_ERROR(UnknownFunction);

// graph / channel
PWE_DEFINE_ERROR(DuplicateId);
PWE_DEFINE_ERROR(MissingCodebook);
PWE_DEFINE_ERROR(UnknownUser);
PWE_DEFINE_ERROR(EmptyProfile);

// optimizers
PWE_DEFINE_ERROR(UnknownMetric);
PWE_DEFINE_ERROR(NoFeasiblePath);
PWE_DEFINE_ERROR(NoArrivals);
PWE_DEFINE_ERROR(EmptyWallRoute);

// update scheduler
PWE_DEFINE_ERROR(UnknownEndpoint);
PWE_DEFINE_ERROR(RoundsNonPositive);
PWE_DEFINE_ERROR(Infeasible);
PWE_DEFINE_ERROR(LimitExceeded);
PWE_DEFINE_ERROR(NoFeasibleSample);

// scenario sim
PWE_DEFINE_ERROR(TimeOutOfRange);
PWE_DEFINE_ERROR(EmptySeries);

// interfaces
PWE_DEFINE_ERROR(ParseError);

#undef PWE_DEFINE_ERROR

// Carries every problem found in one validation pass so callers can report
// them together with key context.
struct ValidationError : Error {
    std::vector<std::string> issues;
    explicit ValidationError(std::vector<std::string> list)
        : Error(join(list)), issues(std::move(list)) {}

  private:
    static std::string join(const std::vector<std::string>& list) {
        std::string s = "validation failed:";
        for (const auto& e : list) {
            s += "\n  - ";
            s += e;
        }
        return s;
    }
};

struct ScenarioInvalid : ValidationError {
    using ValidationError::ValidationError;
};

}  // namespace pwe
