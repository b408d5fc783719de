"""sheafdef: exact-arithmetic workbench for Cech cohomology on finite sites,
dg Lie algebras, Maurer-Cartan theory and deformation pipelines."""

__version__ = "0.1.0"
