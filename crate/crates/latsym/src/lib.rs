// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Catalog files, reports and the command-line front end for
//! [`latsym_core`].

pub mod catalog;
pub mod cli;
pub mod report;

pub use latsym_core;
