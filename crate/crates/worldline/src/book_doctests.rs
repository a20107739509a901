//! Runs every code block of the guide as a doctest, keeping the book and
//! the library in sync.

macro_rules! book_chapter {
    ($name:ident, $path:literal) => {
        #[doc = include_str!($path)]
        mod $name {}
    };
}

book_chapter!(introduction, "../../../book/src/introduction.md");
book_chapter!(spacetimes, "../../../book/src/spacetimes.md");
book_chapter!(slice_measures, "../../../book/src/slice-measures.md");
book_chapter!(causal_curves, "../../../book/src/causal-curves.md");
book_chapter!(curve_measures, "../../../book/src/curve-measures.md");
book_chapter!(vector_fields, "../../../book/src/vector-fields.md");
book_chapter!(observers, "../../../book/src/observers.md");
book_chapter!(cli, "../../../book/src/cli.md");
