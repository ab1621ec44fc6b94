use alloc::vec::Vec;

use super::{Formula, FormulaError};
use crate::network::{Aggregator, LayerParams, NetworkState};

/// φⱼ = bⱼ ⊕ (◇_{wⱼ₀}φ₀ ⊕ (◇_{wⱼ₁}φ₁ ⊕ …)), right-nested in the order the
/// forward pass sums. For unit-interval parameters each ⊕ truncates exactly
/// where ReLU₁ would, so the evaluation matches `forward` bit for bit.
fn layer_formulas(layer: &LayerParams, inputs: &[Formula]) -> Vec<Formula> {
    (0..layer.rows())
        .map(|i| {
            let mut terms = layer
                .row(i)
                .iter()
                .zip(inputs)
                .rev()
                .map(|(&w, phi)| Formula::scale(w, phi.clone()));
            let last = terms.next().expect("layers have at least one column");
            let sum = terms.fold(last, |acc, t| Formula::oplus(t, acc));
            Formula::oplus(Formula::Const(layer.bias(i)), sum)
        })
        .collect()
}

/// One formula per output neuron.
pub fn extract_all(net: &NetworkState) -> Result<Vec<Formula>, FormulaError> {
    if net.max_param_violation().is_some() {
        return Err(FormulaError::NonUnitParameter);
    }
    let mut current: Vec<Formula> = (0..net.input_width()).map(Formula::Var).collect();
    for layer in net.layers() {
        current = layer_formulas(layer, &current);
    }
    Ok(current)
}

pub fn extract(net: &NetworkState, output_index: usize) -> Result<Formula, FormulaError> {
    let width = net.output_width();
    if output_index >= width {
        return Err(FormulaError::OutputIndex {
            index: output_index,
            width,
        });
    }
    Ok(extract_all(net)?.swap_remove(output_index))
}

/// A single formula for `ŷ`: the outputs combined with the derived `∨`, `∧`
/// or with `⊕`, matching the aggregator.
pub fn extract_aggregate(
    net: &NetworkState,
    aggregator: Aggregator,
) -> Result<Formula, FormulaError> {
    let mut outputs = extract_all(net)?.into_iter();
    let first = outputs.next().expect("networks have at least one output");
    Ok(outputs.fold(first, |acc, phi| match aggregator {
        Aggregator::Max => Formula::join(acc, phi),
        Aggregator::Min => Formula::meet(acc, phi),
        Aggregator::TruncatedSum => Formula::oplus(acc, phi),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{print, simplify};
    use crate::mv::{unit_vec, UnitValue};
    use alloc::vec;

    #[test]
    fn single_neuron_rendering() {
        let l = LayerParams::from_rows(&[&[0.4, 0.3]], &[0.1]).unwrap();
        let net = NetworkState::new(2, vec![l]).unwrap();
        let phi = extract(&net, 0).unwrap();
        assert_eq!(print(&phi), "(c0.1 (+) (<0.4>x0 (+) <0.3>x1))");
    }

    #[test]
    fn unit_neuron_simplifies_to_variable() {
        let l = LayerParams::from_rows(&[&[1.0]], &[0.0]).unwrap();
        let net = NetworkState::new(1, vec![l]).unwrap();
        let phi = extract(&net, 0).unwrap();
        assert_eq!(print(&phi), "(c0 (+) <1>x0)");
        assert_eq!(print(&simplify(&phi)), "x0");
    }

    #[test]
    fn worked_example_first_layer_value() {
        let net = NetworkState::worked_example();
        let first = NetworkState::new(2, vec![net.layers()[0].clone()]).unwrap();
        let phi = extract(&first, 0).unwrap();
        let v = phi.eval(&unit_vec(&[0.2, 0.3]).unwrap()).unwrap();
        assert!((v.get() - 0.27).abs() <= 1e-12);
    }

    #[test]
    fn two_three_one_network_matches_forward() {
        // hidden 3 × 2 weights and a 1 × 3 output layer
        let l1 = LayerParams::from_rows(
            &[&[0.1, 0.2], &[0.13, 0.03], &[0.11, 0.1]],
            &[0.08, 0.08, 0.08],
        )
        .unwrap();
        let l2 = LayerParams::from_rows(&[&[0.3, 0.67, 0.15]], &[0.18]).unwrap();
        let net = NetworkState::new(2, vec![l1, l2]).unwrap();
        let x = unit_vec(&[0.2, 0.3]).unwrap();
        let phi = extract(&net, 0).unwrap();
        let via_formula = phi.eval(&x).unwrap();
        let via_forward = net.forward(&x).unwrap().yhat;
        assert_eq!(via_formula.get().to_bits(), via_forward.get().to_bits());
    }

    #[test]
    fn aggregate_formula_is_the_max() {
        let net = NetworkState::worked_example();
        let x = unit_vec(&[0.2, 0.3]).unwrap();
        let phi = extract_aggregate(&net, Aggregator::Max).unwrap();
        let v = phi.eval(&x).unwrap();
        assert!(v.approx_eq(net.forward(&x).unwrap().yhat, 1e-12));
        let sum = extract_aggregate(&net, Aggregator::TruncatedSum).unwrap();
        assert!(sum
            .eval(&x)
            .unwrap()
            .approx_eq(UnitValue::new(0.993).unwrap(), 1e-12));
    }

    #[test]
    fn output_index_checked() {
        let net = NetworkState::worked_example();
        assert_eq!(
            extract(&net, 2),
            Err(FormulaError::OutputIndex { index: 2, width: 2 })
        );
    }
}
