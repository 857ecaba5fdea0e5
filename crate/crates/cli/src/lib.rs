// SPDX-License-Identifier: Apache-2.0

//! Command implementations and the HTTP service behind the `hvcell` binary.

pub mod commands;
pub mod service;
