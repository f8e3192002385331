#include "lithub/error.hpp"

namespace lithub {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::MissingField: return "MissingField";
    case Errc::BadDate: return "BadDate";
    case Errc::StoreUnavailable: return "StoreUnavailable";
    case Errc::NotFound: return "NotFound";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::SingleClassDataset: return "SingleClassDataset";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::ModelMissing: return "ModelMissing";
    case Errc::DegenerateTopic: return "DegenerateTopic";
    case Errc::DanglingConcept: return "DanglingConcept";
    case Errc::DuplicateSurface: return "DuplicateSurface";
    case Errc::BadLink: return "BadLink";
    case Errc::NotAVaccine: return "NotAVaccine";
    case Errc::NonFiniteSignal: return "NonFiniteSignal";
    case Errc::AlreadyDecided: return "AlreadyDecided";
    case Errc::NoNewLabels: return "NoNewLabels";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::AnnotationMismatch: return "AnnotationMismatch";
    case Errc::BadFacet: return "BadFacet";
    case Errc::BadPage: return "BadPage";
    case Errc::PeriodMismatch: return "PeriodMismatch";
    case Errc::StageFailure: return "StageFailure";
    case Errc::BadInput: return "BadInput";
  }
  return "Unknown";
}

}  // namespace lithub
