#pragma once

#include <stdexcept>
#include <string>

namespace quotlab {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define QUOTLAB_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                      \
    public:                                                          \
        explicit Name(const std::string& what) : Error(what) {}      \
    }

QUOTLAB_DEFINE_ERROR(MalformedRecord);
QUOTLAB_DEFINE_ERROR(EmptyCandidates);
QUOTLAB_DEFINE_ERROR(MalformedConllu);
QUOTLAB_DEFINE_ERROR(InvalidTree);
QUOTLAB_DEFINE_ERROR(NoVerbFound);
QUOTLAB_DEFINE_ERROR(DictionaryInvariantViolated);
QUOTLAB_DEFINE_ERROR(EmptyData);
QUOTLAB_DEFINE_ERROR(SingleCluster);
QUOTLAB_DEFINE_ERROR(RankZero);
QUOTLAB_DEFINE_ERROR(UnknownCoefficient);
QUOTLAB_DEFINE_ERROR(DegenerateSamples);
QUOTLAB_DEFINE_ERROR(MissingUpstreamArtifact);
QUOTLAB_DEFINE_ERROR(ConfigError);

#undef QUOTLAB_DEFINE_ERROR

} // namespace quotlab
