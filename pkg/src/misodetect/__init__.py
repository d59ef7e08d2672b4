"""Explainable misogyny-detection workbench for code-mixed Hinglish/English.

Subsystems: dataset handling (:mod:`misodetect.corpus`), text and
multimodal classifiers (:mod:`misodetect.textclf`,
:mod:`misodetect.mmclf`), model-agnostic explanations
(:mod:`misodetect.xai`), rationale/feedback persistence
(:mod:`misodetect.feedback`), questionnaire analytics
(:mod:`misodetect.evalkit`) and the HTTP service (:mod:`misodetect.api`).
"""

__version__ = "0.1.0"
