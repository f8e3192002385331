#pragma once
#include <stdexcept>
#include <string>
#include <string_view>

namespace lithub {

enum class Errc {
  MalformedLine,
  MissingField,
  BadDate,
  StoreUnavailable,
  NotFound,
  EmptyCorpus,
  SingleClassDataset,
  NonFiniteLoss,
  ModelMissing,
  DegenerateTopic,
  DanglingConcept,
  DuplicateSurface,
  BadLink,
  NotAVaccine,
  NonFiniteSignal,
  AlreadyDecided,
  NoNewLabels,
  SizeMismatch,
  AnnotationMismatch,
  BadFacet,
  BadPage,
  PeriodMismatch,
  StageFailure,
  BadInput,
};

std::string_view errc_name(Errc code) noexcept;

// Every failure the library reports is an Error carrying a machine code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace lithub
