use commgrow::experiment::{experiment_csv, read_table, run_experiment, standard_table};
use commgrow::io::{read_edge_list, read_partition, write_edge_list, write_partition};
use commgrow::{analyze, generate, AnalyzeOptions, GenParams, Partition, PartitionKind};

#[test]
fn written_graph_analyzes_like_the_original() {
    let params = GenParams::new(600, 3, 6, 0.8, 0.1, 21);
    let (g, _) = generate(&params).unwrap();
    let truth = Partition::from_labels(&g).unwrap();

    let doc = read_edge_list(&write_edge_list(&g, Some(&params))).unwrap();
    assert_eq!(doc.params, Some(params));
    assert!(doc.remap.is_none());
    let labels = read_partition(&write_partition(&truth), PartitionKind::GroundTruth).unwrap();
    assert_eq!(labels.assignment(), truth.assignment());

    let options = AnalyzeOptions::default();
    let before = analyze(&g, Some(&truth), &options).unwrap();
    let after = analyze(&doc.graph, Some(&labels), &options).unwrap();
    assert_eq!(before, after);
}

#[test]
fn standard_table_layout() {
    let table = standard_table();
    assert_eq!(table.len(), 32);
    assert!(table[..16].iter().all(|r| r.params.n == 1000));
    assert!(table[16..].iter().all(|r| r.params.n == 10_000));
    let row5 = table[4];
    assert_eq!(row5.key, 5);
    assert_eq!(
        (row5.params.n, row5.params.c, row5.params.p_t, row5.params.p_c),
        (1000, 10, 1.0, 0.01)
    );
    assert!(table.iter().enumerate().all(|(i, r)| r.key == i as u32 + 1 && r.params.m == 2));
}

#[test]
fn custom_table_runs_and_validates() {
    let configs = read_table("key,n,m,c,p_t,p_c\n1,200,2,4,1.0,0.5\n2,120,1,3,0.0,0.0\n").unwrap();
    let rows = run_experiment(&configs, 2, 4, 2);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].completed, 2);
    let csv = experiment_csv(&rows);
    assert_eq!(csv.lines().count(), 3);
    assert!(read_table("key,n,m,c,p_t,p_c\n1,10,2,10,1.0,0.5\n").is_err());
}
