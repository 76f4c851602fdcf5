#pragma once

#include <stdexcept>
#include <utility>
#include <variant>

namespace pvkit {

/// Value-or-error carrier for operations whose failure is an expected
/// outcome rather than a bug (token opening, protocol handling).
template <typename T, typename E>
class Result {
public:
    Result(T value) : state_(std::move(value)) {}
    Result(E error) : state_(std::move(error)) {}

    bool ok() const { return std::holds_alternative<T>(state_); }

    const T& value() const& {
        if (!ok()) throw std::logic_error("Result::value() on error result");
        return std::get<T>(state_);
    }

    T&& value() && {
        if (!ok()) throw std::logic_error("Result::value() on error result");
        return std::get<T>(std::move(state_));
    }

    const E& error() const {
        if (ok()) throw std::logic_error("Result::error() on ok result");
        return std::get<E>(state_);
    }

private:
    std::variant<T, E> state_;
};

} // namespace pvkit
