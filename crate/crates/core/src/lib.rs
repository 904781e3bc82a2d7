//! Exact arithmetic for quadratic fields whose class numbers are divisible by
//! three: class numbers from binary quadratic forms, the cubic trinomials that
//! witness unramified cubic extensions, and generators for eight parametrized
//! families of such fields.

pub mod arith;
pub mod classgroup;
pub mod families;
pub mod quadfield;
pub mod trinomial;
