use cuspzero_core::census::{
    census_report, forced_orders, siegel_census, write_summary_csv, write_zeros_csv, CensusConfig, Segment, WitnessRow,
    SUMMARY_HEADER,
};
use cuspzero_core::eigenforms;

#[test]
fn forced_orders_match_eisenstein_monomials() {
    // the weight-k part of E4^a E6^b with a < 3, b < 2 fixes the orders at rho and i
    for k in (12..=200).step_by(2) {
        let (a, b) = (0..3u32)
            .flat_map(|a| (0..2u32).map(move |b| (a, b)))
            .find(|&(a, b)| (4 * a + 6 * b) % 12 == k % 12)
            .unwrap();
        assert_eq!(forced_orders(k), (b, a), "k={k}");
    }
}

#[test]
fn delta_has_no_real_zeros() {
    let f = &eigenforms(12, 192, None).unwrap()[0];
    let r = census_report(f, &CensusConfig::default());
    assert!(r.zeros.is_empty(), "{:?}", r.zeros);
    assert_eq!(r.counts, [Some(0); 3]);
    assert!(!r.is_partial(), "{:?}", r.notes);
}

#[test]
fn weight_24_has_one_real_zero_each() {
    for f in eigenforms(24, 192, None).unwrap() {
        let r = census_report(&f, &CensusConfig::default());
        assert_eq!(r.zeros.len(), 1, "{f}: {:?}", r.zeros);
        assert!(r.zeros[0].width < 1e-10);
        assert!(!r.zeros[0].forced);
    }
}

#[test]
fn forced_zero_at_i_is_reported_once() {
    for f in eigenforms(30, 192, None).unwrap() {
        let r = census_report(&f, &CensusConfig::default());
        let at_i: Vec<_> = r.zeros.iter().filter(|z| z.corner && z.segment == Segment::Delta1).collect();
        assert_eq!(at_i.len(), 1, "{f}: {:?}", r.zeros);
        assert!(at_i[0].forced && (at_i[0].location - 1.0).abs() < 1e-9);
    }
}

#[test]
fn siegel_counts_and_csv_schema() {
    let fs = eigenforms(48, 192, None).unwrap();
    let cfg = CensusConfig { y_list: vec![1.2, 2.5], ..CensusConfig::default() };
    let reports: Vec<_> = fs.iter().map(|f| census_report(f, &cfg)).collect();
    for (f, r) in fs.iter().zip(&reports) {
        assert_eq!(r.siegel.len(), 2);
        assert!(r.siegel[0].total >= r.siegel[1].total);
        let direct = siegel_census(f, &[1.2], &cfg).unwrap();
        assert_eq!(direct[0], r.siegel[0]);
        let p = r.predictions.unwrap();
        assert!(p.iter().all(|&x| x > 0.0));
    }
    let mut buf = Vec::new();
    write_summary_csv(&mut buf, &reports, true).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), SUMMARY_HEADER.join(","));
    assert_eq!(lines.count(), 2 * fs.len());

    let w = WitnessRow { kind: "first_negative".into(), param_lo: 1.0, param_hi: 1.0, flags: "n=2".into() };
    let mut buf = Vec::new();
    write_zeros_csv(&mut buf, &reports[0], &[w]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("segment,param_lo,param_hi,location,width,flags\n"));
    assert!(text.lines().last().unwrap().starts_with("first_negative,"));
}

#[test]
fn reports_are_deterministic() {
    let f = &eigenforms(60, 192, None).unwrap()[1];
    let cfg = CensusConfig { y_list: vec![2.0], ..CensusConfig::default() };
    let a = census_report(f, &cfg);
    let b = census_report(f, &cfg);
    assert_eq!(a, b);
}
