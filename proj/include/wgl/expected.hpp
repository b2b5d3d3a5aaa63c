#pragma once

#include <stdexcept>
#include <type_traits>
#include <utility>
#include <variant>

namespace wgl {

// Minimal value-or-error holder. The toolchain targets C++20, so
// std::expected is not available yet.
template <class E>
struct Unexpected {
  E error;
};

template <class E>
Unexpected<std::decay_t<E>> unexpected(E&& e) {
  return {std::forward<E>(e)};
}

class BadExpectedAccess : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

template <class T, class E>
class Expected {
 public:
  using value_type = T;
  using error_type = E;

  Expected(const T& v) : storage_(std::in_place_index<0>, v) {}
  Expected(T&& v) : storage_(std::in_place_index<0>, std::move(v)) {}
  template <class G>
  Expected(Unexpected<G> u) : storage_(std::in_place_index<1>, std::move(u.error)) {}

  bool has_value() const noexcept { return storage_.index() == 0; }
  explicit operator bool() const noexcept { return has_value(); }

  T& value() & {
    check();
    return std::get<0>(storage_);
  }
  const T& value() const& {
    check();
    return std::get<0>(storage_);
  }
  T&& value() && {
    check();
    return std::get<0>(std::move(storage_));
  }

  const E& error() const& {
    if (has_value()) throw BadExpectedAccess("Expected holds a value");
    return std::get<1>(storage_);
  }
  E&& error() && {
    if (has_value()) throw BadExpectedAccess("Expected holds a value");
    return std::get<1>(std::move(storage_));
  }

  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

 private:
  void check() const {
    if (!has_value()) throw BadExpectedAccess("Expected holds an error");
  }

  std::variant<T, E> storage_;
};

// Specialization for operations that only report success or failure.
template <class E>
class Expected<void, E> {
 public:
  Expected() = default;
  template <class G>
  Expected(Unexpected<G> u) : error_(std::move(u.error)), ok_(false) {}

  bool has_value() const noexcept { return ok_; }
  explicit operator bool() const noexcept { return ok_; }
  void value() const {
    if (!ok_) throw BadExpectedAccess("Expected holds an error");
  }
  const E& error() const {
    if (ok_) throw BadExpectedAccess("Expected holds a value");
    return error_;
  }

 private:
  E error_{};
  bool ok_ = true;
};

}  // namespace wgl
