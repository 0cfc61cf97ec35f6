#pragma once

// Thin RAII layer over the C API for the command-line front end.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "idsa/idsa.h"

namespace cli {

class CapiError : public std::runtime_error {
 public:
  CapiError(idsa_status s, const std::string& msg) : std::runtime_error(msg), status_(s) {}
  idsa_status status() const { return status_; }

 private:
  idsa_status status_;
};

inline void check(idsa_status s) {
  if (s != IDSA_OK) throw CapiError(s, std::string(idsa_status_name(s)) + ": " + idsa_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

template <class T, void (*Free)(T*), class F>
std::shared_ptr<T> make_handle(F&& create) {
  T* raw = nullptr;
  check(create(&raw));
  return std::shared_ptr<T>(raw, Deleter<T, Free>{});
}

using GroupH = std::shared_ptr<idsa_group>;
using SubsetH = std::shared_ptr<idsa_subset>;
using ColouringH = std::shared_ptr<idsa_colouring>;
using OperatorH = std::shared_ptr<idsa_operator>;
using FreqsH = std::shared_ptr<idsa_freqs>;
using StepH = std::shared_ptr<idsa_step>;

template <class F>
GroupH make_group(F&& f) { return make_handle<idsa_group, idsa_group_free>(f); }
template <class F>
SubsetH make_subset(F&& f) { return make_handle<idsa_subset, idsa_subset_free>(f); }
template <class F>
ColouringH make_colouring(F&& f) { return make_handle<idsa_colouring, idsa_colouring_free>(f); }
template <class F>
OperatorH make_operator(F&& f) { return make_handle<idsa_operator, idsa_operator_free>(f); }
template <class F>
FreqsH make_freqs(F&& f) { return make_handle<idsa_freqs, idsa_freqs_free>(f); }
template <class F>
StepH make_step(F&& f) { return make_handle<idsa_step, idsa_step_free>(f); }

struct StepData {
  double initial = 0.0;
  std::vector<double> breakpoints;
  std::vector<double> values;
};

inline StepData step_data(const idsa_step* s) {
  size_t n = 0;
  check(idsa_step_size(s, &n));
  StepData d;
  d.breakpoints.resize(n);
  d.values.resize(n);
  check(idsa_step_data(s, &d.initial, d.breakpoints.data(), d.values.data(), n));
  return d;
}

inline size_t subset_size(const idsa_subset* s) {
  size_t n = 0;
  check(idsa_subset_size(s, &n));
  return n;
}

}  // namespace cli
