# QuboSculpt - 基于 QUBO 的声学形状优化框架
# QuboSculpt - QUBO-driven acoustic shape optimization framework

__version__ = "1.0.0"
__app_name__ = "QuboSculpt"
