#pragma once

#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sgdlab {

// Ordered coordinate names. Copies share storage.
class Schema {
 public:
  Schema();
  explicit Schema(std::vector<std::string> names);
  Schema(std::initializer_list<std::string> names);

  std::size_t size() const { return names_->size(); }
  const std::string& operator[](std::size_t i) const { return (*names_)[i]; }
  const std::vector<std::string>& names() const { return *names_; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index(std::string_view name) const;  // throws SchemaError

  bool operator==(const Schema& other) const;

 private:
  std::shared_ptr<const std::vector<std::string>> names_;
};

void require_same_schema(const Schema& a, const Schema& b, std::string_view context);

class SummaryVec {
 public:
  SummaryVec(Schema schema, std::vector<double> values);

  const Schema& schema() const { return schema_; }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> span() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(std::string_view name) const { return values_[schema_.index(name)]; }

 private:
  Schema schema_;
  std::vector<double> values_;
};

double distance(const SummaryVec& a, const SummaryVec& b);
double norm(std::span<const double> x);

}  // namespace sgdlab
