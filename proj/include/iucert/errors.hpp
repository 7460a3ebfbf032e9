#pragma once

#include <stdexcept>
#include <string>

namespace iucert {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define IUCERT_DEFINE_ERROR(Name)              \
    class Name : public Error {                \
    public:                                    \
        using Error::Error;                    \
    }

IUCERT_DEFINE_ERROR(DomainError);
IUCERT_DEFINE_ERROR(ConvergenceError);
IUCERT_DEFINE_ERROR(QuadratureError);
IUCERT_DEFINE_ERROR(NotSatisfiable);
IUCERT_DEFINE_ERROR(InvalidPotential);
IUCERT_DEFINE_ERROR(SignError);
IUCERT_DEFINE_ERROR(ComparisonFailure);
IUCERT_DEFINE_ERROR(SandwichViolation);
IUCERT_DEFINE_ERROR(ContractionViolation);
IUCERT_DEFINE_ERROR(CertificateViolation);
IUCERT_DEFINE_ERROR(ConfigError);

#undef IUCERT_DEFINE_ERROR

}  // namespace iucert
