#[path = "oracles/gradient.rs"]
mod oracle;

#[test]
fn every_gradient_entry_matches_central_differences() {
    oracle::every_gradient_entry_matches_central_differences();
}

#[test]
fn adjoint_and_parameter_shift_backprop_agree() {
    oracle::adjoint_and_parameter_shift_backprop_agree();
}

#[test]
fn later_parameters_ignore_earlier_loss_terms() {
    oracle::later_parameters_ignore_earlier_loss_terms();
}

#[test]
fn exact_estimates_give_zero_gradient() {
    oracle::exact_estimates_give_zero_gradient();
}
