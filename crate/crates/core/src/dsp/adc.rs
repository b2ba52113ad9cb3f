use crate::{Error, Result};

/// Full-scale count of the 12-bit converter on the EMG boards.
pub const ADC_MAX_COUNT: f64 = 4095.0;
/// ADC reference voltage in volts.
pub const ADC_REFERENCE_VOLTS: f64 = 1.1;

/// Converts raw 12-bit ADC counts into volts, `v = 1.1 / 4095 * s`.
pub fn adc_to_voltage(raw: &[f64]) -> Result<Vec<f64>> {
    raw.iter()
        .enumerate()
        .map(|(index, &count)| {
            if (0.0..=ADC_MAX_COUNT).contains(&count) {
                Ok(ADC_REFERENCE_VOLTS / ADC_MAX_COUNT * count)
            } else {
                Err(Error::Range {
                    index,
                    value: count,
                    min: 0.0,
                    max: ADC_MAX_COUNT,
                })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_half_scale() {
        let v = adc_to_voltage(&[0.0, 4095.0, 2048.0]).unwrap();
        assert_eq!(v[0], 0.0);
        assert!((v[1] - 1.1).abs() < 1e-15);
        // 1.1 * 2048 / 4095
        assert!((v[2] - 0.550_134_310_134_310_1).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_names_index() {
        match adc_to_voltage(&[10.0, 20.0, 4096.0, -1.0]) {
            Err(Error::Range { index, value, .. }) => {
                assert_eq!(index, 2);
                assert_eq!(value, 4096.0);
            }
            other => panic!("expected range error, got {other:?}"),
        }
        assert!(matches!(adc_to_voltage(&[f64::NAN]), Err(Error::Range { index: 0, .. })));
    }
}
