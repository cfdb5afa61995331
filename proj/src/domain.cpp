#include "batchlab/domain.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "batchlab/errors.hpp"

namespace batchlab {

std::string_view to_string(Priority p) {
  switch (p) {
    case Priority::routine: return "ROUTINE";
    case Priority::statim: return "STATIM";
    case Priority::vital: return "VITAL";
  }
  return "?";
}

Priority parse_priority(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "ROUTINE") return Priority::routine;
  if (upper == "STATIM") return Priority::statim;
  if (upper == "VITAL") return Priority::vital;
  throw UsageError("unknown priority '" + std::string(text) +
                   "' (expected ROUTINE, STATIM or VITAL)");
}

std::string normalize_ward(std::string_view ward) {
  auto first = ward.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = ward.find_last_not_of(" \t\r\n");
  std::string out(ward.substr(first, last - first + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

void validate(const Sample& sample) {
  if (sample.registration < 0)
    throw DomainError("sample " + std::to_string(sample.id) + ": negative registration time");
  if (sample.transport <= 0)
    throw DomainError("sample " + std::to_string(sample.id) + ": transport time must be positive");
  if (sample.processing <= 0)
    throw DomainError("sample " + std::to_string(sample.id) + ": processing time must be positive");
}

void CentrifugeConfig::validate() const {
  if (capacity < 1) throw DomainError("centrifuge capacity must be >= 1");
  if (cycle_time <= 0) throw DomainError("centrifuge cycle time must be > 0");
}

namespace {
void check_pair(const CompletionRecord& record, const Sample& sample) {
  if (record.sample_id != sample.id)
    throw UsageError("completion record for sample " + std::to_string(record.sample_id) +
                     " paired with sample " + std::to_string(sample.id));
}
}  // namespace

Seconds patient_tat(const CompletionRecord& record, const Sample& sample) {
  check_pair(record, sample);
  return record.completion - sample.registration;
}

Seconds laboratory_tat(const CompletionRecord& record, const Sample& sample) {
  check_pair(record, sample);
  return record.completion - sample.arrival();
}

}  // namespace batchlab
