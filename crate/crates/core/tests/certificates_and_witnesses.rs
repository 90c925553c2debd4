use qdcert::cayley::free_ball;
use qdcert::mflef::{format_lef_witness, lef_witness_search, parse_lef_witness, verify_lef_witness};
use qdcert::qdnum::{cf_lower_bound, f2_split_certificate, f2_standard_certificate, QdError};

#[test]
fn split_certificate_gives_one_third() {
    let cert = f2_split_certificate();
    let lb = cf_lower_bound(&cert.verified(6).unwrap()).unwrap();
    assert_eq!((*lb.bound.numer(), *lb.bound.denom()), (1, 3));
}

#[test]
fn small_radius_is_not_a_proof() {
    let cert = f2_standard_certificate();
    assert!(cert.verify(3).unwrap().passed());
    assert!(matches!(cert.verified(3), Err(QdError::VerificationRadius { got: 3, min: 6 })));
}

#[test]
fn lef_witness_round_trips_through_text() {
    let ball = free_ball(2).unwrap();
    let w = lef_witness_search(ball.elements(), &(2..=16).collect::<Vec<_>>()).unwrap();
    let text = format_lef_witness(&w);
    let back = parse_lef_witness(&text).unwrap();
    assert_eq!(back.modulus, w.modulus);
    assert_eq!(back.phi, w.phi);
    assert!(verify_lef_witness(&back).unwrap().ok());
}
