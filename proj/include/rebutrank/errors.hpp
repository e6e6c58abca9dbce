#ifndef REBUTRANK_ERRORS_HPP
#define REBUTRANK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rebutrank {

// Base class for all error conditions raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// corpus
class MalformedRow : public Error { public: using Error::Error; };
class DuplicateId : public Error { public: using Error::Error; };
class DanglingCounterLink : public Error { public: using Error::Error; };
class TooFewMotions : public Error { public: using Error::Error; };

// textproc
class EmptyTrainingSet : public Error { public: using Error::Error; };

// embeddings
class DimensionMismatch : public Error { public: using Error::Error; };
class UnparseableLine : public Error { public: using Error::Error; };

// transport
class NumericalFailure : public Error { public: using Error::Error; };

// scorers
class EmptyMatrix : public Error { public: using Error::Error; };
class MissingScore : public Error { public: using Error::Error; };
class MalformedScoreFile : public Error { public: using Error::Error; };

// eval
class InstanceMismatch : public Error { public: using Error::Error; };
class EmptyInstanceSet : public Error { public: using Error::Error; };

// tuning
class EmptyTuningSet : public Error { public: using Error::Error; };

// cli / config
class ConfigError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

} // namespace rebutrank

#endif
