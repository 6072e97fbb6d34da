#include "sgdlab/core/summary.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sgdlab/core/errors.hpp"

namespace sgdlab {

Schema::Schema() : names_(std::make_shared<const std::vector<std::string>>()) {}

Schema::Schema(std::vector<std::string> names)
    : names_(std::make_shared<const std::vector<std::string>>(std::move(names))) {}

Schema::Schema(std::initializer_list<std::string> names)
    : Schema(std::vector<std::string>(names)) {}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_->size(); ++i)
    if ((*names_)[i] == name) return i;
  return std::nullopt;
}

std::size_t Schema::index(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw SchemaError(fmt::format("no coordinate named '{}' in schema", name));
}

bool Schema::operator==(const Schema& other) const {
  return names_ == other.names_ || *names_ == *other.names_;
}

void require_same_schema(const Schema& a, const Schema& b, std::string_view context) {
  if (!(a == b))
    throw SchemaError(fmt::format("{}: schema mismatch ({} vs {} coordinates)", context, a.size(),
                                  b.size()));
}

SummaryVec::SummaryVec(Schema schema, std::vector<double> values)
    : schema_(std::move(schema)), values_(std::move(values)) {
  if (values_.size() != schema_.size())
    throw SchemaError(fmt::format("summary has {} values for a {}-coordinate schema",
                                  values_.size(), schema_.size()));
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw DomainError(fmt::format("non-finite summary coordinate '{}'", schema_[i]));
}

double norm(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double distance(const SummaryVec& a, const SummaryVec& b) {
  require_same_schema(a.schema(), b.schema(), "distance");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace sgdlab
