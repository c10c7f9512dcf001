'''
One form per subcommand. Fields left out of a config fall back to
settings.BUBBLELAB, then to the field's own initial value.
'''
from django import forms
from django.conf import settings

from bubbles.construct import LAMBDA_1
from flow.engine import DT_SAFETY, parse_init
from torus.grid import MIN_SAMPLES, RESOLUTION_LIMIT


def check_lambda(lam, grid_n=None, name='lambda'):
    '''
    :raises forms.ValidationError: unless lam >= 2 and, with a grid,
      lambda * h <= 0.2.
    '''
    if not lam >= LAMBDA_1:
        raise forms.ValidationError('%s must be at least %g, got %g'
                                    % (name, LAMBDA_1, lam))
    if grid_n and lam / grid_n > RESOLUTION_LIMIT:
        raise forms.ValidationError(
            '%s=%g on grid_n=%i gives lambda*h = %g > %g'
            % (name, lam, grid_n, lam / grid_n, RESOLUTION_LIMIT))


class LambdaListField(forms.CharField):
    '''
    A comma separated list of bubble scales.
    '''
    def to_python(self, value):
        value = super().to_python(value)
        if value in self.empty_values:
            return None
        try:
            return tuple(float(item) for item in value.split(','))
        except ValueError:
            raise forms.ValidationError('lambdas must be comma separated numbers')


class RunForm(forms.Form):
    grid_n = forms.IntegerField(required=False, min_value=MIN_SAMPLES)
    seed = forms.IntegerField(required=False, min_value=0)
    out = forms.CharField(required=False)

    def clean(self):
        cleaned = super().clean()
        defaults = settings.BUBBLELAB
        for name, field in self.fields.items():
            if cleaned.get(name) in (None, ''):
                if name in defaults:
                    cleaned[name] = defaults[name]
                elif field.initial is not None:
                    cleaned[name] = field.initial
        return cleaned


class GreensTableForm(RunForm):
    sigma = forms.FloatField(required=False, min_value=1e-6)
    images = forms.IntegerField(required=False, min_value=0)
    modes = forms.IntegerField(required=False, min_value=1)
    a1 = forms.FloatField(required=False, initial=0.0)
    a2 = forms.FloatField(required=False, initial=0.0)
    rotations = forms.IntegerField(required=False, min_value=1, initial=5)


class BubbleForm(RunForm):
    a1 = forms.FloatField(required=False, initial=0.5)
    a2 = forms.FloatField(required=False, initial=0.5)
    rot1 = forms.FloatField(required=False, initial=0.0)
    rot2 = forms.FloatField(required=False, initial=0.0)
    rot3 = forms.FloatField(required=False, initial=0.0)


class BubbleScanForm(BubbleForm):
    lambdas = LambdaListField(required=False)
    lam = forms.FloatField(required=False)
    samples = forms.IntegerField(required=False, min_value=1)

    def clean(self):
        cleaned = super().clean()
        if cleaned.get('lam') is not None:
            check_lambda(cleaned['lam'])
            raise forms.ValidationError('a scan takes its scales from lambdas')
        lambdas = tuple(cleaned.get('lambdas') or ())
        if len(lambdas) < 2:
            raise forms.ValidationError('a scan needs at least two lambdas')
        for lam in lambdas:
            check_lambda(lam, cleaned.get('grid_n'))
        cleaned['lambdas'] = lambdas
        return cleaned


class FlowForm(RunForm):
    init = forms.CharField(required=False, initial='constant')
    # a bubble init at the default attachment point and rotation
    lam = forms.FloatField(required=False)
    t_end = forms.FloatField(required=False, min_value=0.0)
    dt_safety = forms.FloatField(required=False, min_value=1e-6, max_value=DT_SAFETY)
    sample_every = forms.IntegerField(required=False, min_value=1)
    e_inf = forms.FloatField(required=False)
    dist_every = forms.IntegerField(required=False, min_value=0)
    max_steps = forms.IntegerField(required=False, min_value=1, initial=10 ** 6)
    alpha = forms.FloatField(required=False, min_value=0.0)
    out_csv = forms.CharField(required=False, initial='flow.csv')
    out_json = forms.CharField(required=False, initial='flow.json')

    def clean_alpha(self):
        alpha = self.cleaned_data.get('alpha')
        if alpha is not None and not alpha < 0.5:
            raise forms.ValidationError('alpha must be below 1/2, got %g' % alpha)
        return alpha

    def clean(self):
        cleaned = super().clean()
        lam = cleaned.get('lam')
        if lam is not None:
            check_lambda(lam, cleaned.get('grid_n'))
            if self.data.get('init') not in (None, '', 'constant'):
                raise forms.ValidationError('give the bubble scale in init or as lambda, '
                                            'not both')
            cleaned['init'] = 'bubble:%r,0.5,0.5,0,0,0' % lam
        init = cleaned.get('init')
        if init:
            try:
                kind, args = parse_init(init)
            except ValueError as error:
                raise forms.ValidationError(str(error))
            if kind == 'bubble':
                check_lambda(args[0], cleaned.get('grid_n'))
        return cleaned


class LojCheckForm(RunForm):
    series = forms.CharField()
    scan = forms.CharField(required=False)
    e_inf = forms.FloatField(required=False)
    bounded_factor = forms.FloatField(required=False, min_value=1.0)


class DistFitForm(BubbleForm):
    field = forms.CharField(required=False)
    # 'lambda' is a keyword, so the form field is renamed on the way in
    lam = forms.FloatField(required=False, initial=20.0)
    seed_lambda = forms.FloatField(required=False)
    epsilon = forms.FloatField(required=False, min_value=0.0)

    def clean(self):
        cleaned = super().clean()
        grid_n = None if cleaned.get('field') else cleaned.get('grid_n')
        if cleaned.get('lam') is not None:
            check_lambda(cleaned['lam'], grid_n)
        if cleaned.get('seed_lambda') is None:
            cleaned['seed_lambda'] = cleaned.get('lam')
        else:
            check_lambda(cleaned['seed_lambda'], grid_n, 'seed_lambda')
        return cleaned


FORMS = {
    'greens_table': GreensTableForm,
    'bubble_scan': BubbleScanForm,
    'flow': FlowForm,
    'loj_check': LojCheckForm,
    'dist_fit': DistFitForm,
}

#: Config keys that differ from form field names
KEY_ALIASES = {'lambda': 'lam'}
