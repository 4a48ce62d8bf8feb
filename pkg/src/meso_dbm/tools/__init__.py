# Tools package: every module exposes run(**params) and spec()
