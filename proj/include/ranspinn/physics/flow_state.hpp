#pragma once

#include <array>

#include "ranspinn/autodiff/jet2.hpp"

namespace ranspinn::physics {

/// The five predicted fields, in network order.
enum class Field : int { U = 0, V = 1, P = 2, K = 3, Eps = 4 };

inline constexpr std::array<Field, 5> kAllFields = {Field::U, Field::V, Field::P, Field::K, Field::Eps};
inline constexpr std::array<const char*, 5> kFieldNames = {"u", "v", "p", "k", "eps"};

inline constexpr int index_of(Field f) { return static_cast<int>(f); }
inline constexpr const char* name_of(Field f) { return kFieldNames[index_of(f)]; }

/// Normalized fields and their spatial jets at one collocation point.
template <class T>
struct FlowState {
    ad::Jet2<T> u;
    ad::Jet2<T> v;
    ad::Jet2<T> p;
    ad::Jet2<T> k;
    ad::Jet2<T> eps;
    double x = 0.0;
    double y = 0.0;
    double re = 1.0;

    const ad::Jet2<T>& operator[](Field f) const {
        switch (f) {
            case Field::U: return u;
            case Field::V: return v;
            case Field::P: return p;
            case Field::K: return k;
            default: return eps;
        }
    }
    ad::Jet2<T>& operator[](Field f) { return const_cast<ad::Jet2<T>&>(static_cast<const FlowState&>(*this)[f]); }
};

}  // namespace ranspinn::physics
