//! Rank-order character trigram language identification.
//!
//! Each reference language is summarised by the ranks of its most frequent
//! padded character trigrams. A text is assigned to the language whose
//! ranking is closest under the out-of-place distance.

use std::collections::HashMap;
use std::sync::OnceLock;

/// Code returned when no language can be determined.
pub const UNDETERMINED: &str = "und";

/// Number of ranked trigrams kept per profile.
const PROFILE_SIZE: usize = 400;

/// Anything that maps text to an ISO 639-1 code (or [`UNDETERMINED`]).
pub trait LanguageDetector: Send + Sync {
    fn detect(&self, text: &str) -> String;
}

/// Ranked trigram profile.
#[derive(Debug, Clone)]
pub struct TrigramProfile {
    ranks: HashMap<String, usize>,
}

impl TrigramProfile {
    pub fn from_text(text: &str, size: usize) -> Self {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for gram in trigrams(text) {
            *counts.entry(gram).or_default() += 1;
        }
        let mut ordered: Vec<(String, usize)> = counts.into_iter().collect();
        ordered.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let ranks = ordered
            .into_iter()
            .take(size)
            .enumerate()
            .map(|(rank, (gram, _))| (gram, rank))
            .collect();
        Self { ranks }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Out-of-place distance of `self` (a document) against `reference`.
    pub fn distance(&self, reference: &TrigramProfile, max_penalty: usize) -> usize {
        self.ranks
            .iter()
            .map(|(gram, &rank)| match reference.ranks.get(gram) {
                Some(&r) => rank.abs_diff(r),
                None => max_penalty,
            })
            .sum()
    }
}

fn trigrams(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|w| !w.is_empty())
        .flat_map(|word| {
            let padded: Vec<char> = std::iter::once(' ')
                .chain(word.chars().flat_map(char::to_lowercase))
                .chain(std::iter::once(' '))
                .collect();
            padded
                .windows(3)
                .map(|w| w.iter().collect::<String>())
                .collect::<Vec<_>>()
        })
}

/// Trigram classifier over the embedded reference languages.
pub struct TrigramDetector {
    languages: Vec<(&'static str, TrigramProfile)>,
}

impl TrigramDetector {
    pub fn new(references: &[(&'static str, &str)]) -> Self {
        let languages = references
            .iter()
            .map(|(code, text)| (*code, TrigramProfile::from_text(text, PROFILE_SIZE)))
            .collect();
        Self { languages }
    }

    /// Detector over the built-in reference texts.
    pub fn embedded() -> &'static TrigramDetector {
        static DETECTOR: OnceLock<TrigramDetector> = OnceLock::new();
        DETECTOR.get_or_init(|| TrigramDetector::new(REFERENCE_TEXTS))
    }

    pub fn languages(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.languages.iter().map(|(code, _)| *code)
    }
}

impl LanguageDetector for TrigramDetector {
    fn detect(&self, text: &str) -> String {
        let doc = TrigramProfile::from_text(text, PROFILE_SIZE);
        if doc.is_empty() {
            return UNDETERMINED.to_string();
        }
        // Strict `<` keeps the earliest language on ties.
        let mut best: Option<(&str, usize)> = None;
        for (code, profile) in &self.languages {
            let d = doc.distance(profile, PROFILE_SIZE);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((code, d));
            }
        }
        best.map(|(c, _)| c.to_string())
            .unwrap_or_else(|| UNDETERMINED.to_string())
    }
}

/// Detect the language of `text` with the embedded profiles.
pub fn detect_language(text: &str) -> String {
    if text.trim().is_empty() {
        return UNDETERMINED.to_string();
    }
    TrigramDetector::embedded().detect(text)
}

const REFERENCE_TEXTS: &[(&str, &str)] = &[
    ("en", EN),
    ("es", ES),
    ("fr", FR),
    ("de", DE),
    ("it", IT),
    ("pt", PT),
    ("nl", NL),
    ("sv", SV),
    ("pl", PL),
    ("tr", TR),
];

const EN: &str = "The quick brown fox jumps over the lazy dog. When we started the project \
we did not know which language to choose, so we wrote a small prototype in each of them and \
compared the results. Most of the team had worked with JavaScript before, but some of us \
wanted to learn something new. Writing software is not only about code; it is about people, \
about communication and about the habits that help a team ship on time. I have been working \
from home for three years now and there are things I would like to share with you. First, \
keep a routine and take breaks. Second, make sure that your tools are working for you and not \
the other way around. In this article I will show how to set up a development environment, \
how to write tests that are easy to read, and why the best way to learn is to build things \
that you actually need. If you have any questions, feel free to leave a comment below. Thank \
you for reading and have a great day. They were there with their friends, and she said that \
he would be here soon. This is the thing that they have been waiting for through the whole \
week, although nobody could tell what it would look like in the end. Everything should be \
simple enough for anyone who wants to understand how the world around them works.";

const ES: &str = "El desarrollo de software es una actividad creativa y a veces difícil. Cuando \
empezamos el proyecto no sabíamos qué lenguaje elegir, así que escribimos un pequeño prototipo \
en cada uno y comparamos los resultados. La mayoría del equipo había trabajado con JavaScript, \
pero algunos queríamos aprender algo nuevo. Escribir programas no es solo una cuestión de \
código; también se trata de las personas, de la comunicación y de los hábitos que ayudan a un \
equipo a entregar a tiempo. Llevo tres años trabajando desde casa y hay cosas que me gustaría \
compartir con ustedes. Primero, mantén una rutina y haz pausas. Segundo, asegúrate de que tus \
herramientas trabajan para ti y no al revés. En este artículo voy a mostrar cómo configurar un \
entorno de desarrollo, cómo escribir pruebas fáciles de leer y por qué la mejor manera de \
aprender es construir cosas que realmente necesitas. Si tienes alguna pregunta, puedes dejar un \
comentario abajo. Gracias por leer y que tengas un buen día. Ellos estaban allí con sus amigos \
y ella dijo que él llegaría pronto. Es divertido ver cómo las ideas se convierten en \
aplicaciones que usan miles de personas todos los días en la ciudad y en el campo.";

const FR: &str = "Le développement de logiciels est une activité créative et parfois difficile. \
Quand nous avons commencé le projet, nous ne savions pas quel langage choisir, alors nous avons \
écrit un petit prototype dans chacun d'eux et nous avons comparé les résultats. La plupart de \
l'équipe avait déjà travaillé avec JavaScript, mais certains d'entre nous voulaient apprendre \
quelque chose de nouveau. Écrire des programmes, ce n'est pas seulement une question de code; \
c'est aussi une affaire de personnes, de communication et d'habitudes qui aident une équipe à \
livrer à temps. Je travaille à la maison depuis trois ans et il y a des choses que je voudrais \
partager avec vous. D'abord, gardez une routine et faites des pauses. Ensuite, assurez-vous que \
vos outils travaillent pour vous et pas l'inverse. Dans cet article, je vais montrer comment \
configurer un environnement de développement, comment écrire des tests faciles à lire et \
pourquoi la meilleure façon d'apprendre est de construire des choses dont vous avez vraiment \
besoin. Si vous avez des questions, n'hésitez pas à laisser un commentaire. Merci de votre \
lecture et bonne journée. Ils étaient là avec leurs amis et elle a dit qu'il arriverait bientôt.";

const DE: &str = "Die Entwicklung von Software ist eine kreative und manchmal schwierige \
Tätigkeit. Als wir mit dem Projekt begonnen haben, wussten wir nicht, welche Sprache wir \
wählen sollten, also haben wir in jeder einen kleinen Prototyp geschrieben und die Ergebnisse \
verglichen. Die meisten im Team hatten schon mit JavaScript gearbeitet, aber einige von uns \
wollten etwas Neues lernen. Beim Schreiben von Programmen geht es nicht nur um Code, sondern \
auch um Menschen, um Kommunikation und um die Gewohnheiten, die einem Team helfen, rechtzeitig \
zu liefern. Ich arbeite seit drei Jahren von zu Hause aus und es gibt Dinge, die ich mit euch \
teilen möchte. Erstens: Behalte eine Routine bei und mach Pausen. Zweitens: Sorge dafür, dass \
deine Werkzeuge für dich arbeiten und nicht umgekehrt. In diesem Artikel zeige ich, wie man \
eine Entwicklungsumgebung einrichtet, wie man Tests schreibt, die leicht zu lesen sind, und \
warum der beste Weg zu lernen darin besteht, Dinge zu bauen, die man wirklich braucht. Wenn du \
Fragen hast, schreib gerne einen Kommentar. Danke fürs Lesen und einen schönen Tag noch. Sie \
waren mit ihren Freunden dort, und sie sagte, dass er bald kommen würde.";

const IT: &str = "Lo sviluppo del software è un'attività creativa e a volte difficile. Quando \
abbiamo iniziato il progetto non sapevamo quale linguaggio scegliere, quindi abbiamo scritto un \
piccolo prototipo in ciascuno di essi e abbiamo confrontato i risultati. La maggior parte della \
squadra aveva già lavorato con JavaScript, ma alcuni di noi volevano imparare qualcosa di nuovo. \
Scrivere programmi non è solo una questione di codice; riguarda anche le persone, la \
comunicazione e le abitudini che aiutano una squadra a consegnare in tempo. Lavoro da casa da \
tre anni e ci sono cose che vorrei condividere con voi. Prima di tutto, mantenete una routine e \
fate delle pause. In secondo luogo, assicuratevi che i vostri strumenti lavorino per voi e non \
il contrario. In questo articolo mostrerò come configurare un ambiente di sviluppo, come \
scrivere test facili da leggere e perché il modo migliore per imparare è costruire cose di cui \
avete davvero bisogno. Se avete domande, lasciate pure un commento qui sotto. Grazie per la \
lettura e buona giornata. Erano lì con i loro amici e lei ha detto che lui sarebbe arrivato \
presto. Gli sviluppatori della città hanno parlato degli strumenti per tutto il giorno.";

const PT: &str = "O desenvolvimento de software é uma atividade criativa e às vezes difícil. \
Quando começamos o projeto, não sabíamos qual linguagem escolher, então escrevemos um pequeno \
protótipo em cada uma delas e comparamos os resultados. A maior parte da equipe já tinha \
trabalhado com JavaScript, mas alguns de nós queriam aprender algo novo. Escrever programas não \
é apenas uma questão de código; também envolve pessoas, comunicação e os hábitos que ajudam uma \
equipe a entregar no prazo. Trabalho em casa há três anos e há coisas que eu gostaria de \
compartilhar com vocês. Primeiro, mantenha uma rotina e faça pausas. Segundo, garanta que as \
suas ferramentas trabalham para você e não o contrário. Neste artigo vou mostrar como \
configurar um ambiente de desenvolvimento, como escrever testes fáceis de ler e por que a \
melhor maneira de aprender é construir coisas de que você realmente precisa. Se tiver alguma \
dúvida, deixe um comentário abaixo. Obrigado pela leitura e tenha um ótimo dia. Eles estavam lá \
com os seus amigos e ela disse que ele chegaria em breve. As aplicações são usadas por milhões \
de pessoas não só nas cidades, mas também no interior do país.";

const NL: &str = "Het ontwikkelen van software is een creatieve en soms moeilijke bezigheid. \
Toen we met het project begonnen, wisten we niet welke taal we moesten kiezen, dus hebben we in \
elke taal een klein prototype geschreven en de resultaten vergeleken. De meeste mensen in het \
team hadden al met JavaScript gewerkt, maar sommigen van ons wilden iets nieuws leren. Het \
schrijven van programma's gaat niet alleen over code; het gaat ook over mensen, over \
communicatie en over de gewoonten die een team helpen om op tijd op te leveren. Ik werk nu drie \
jaar thuis en er zijn dingen die ik graag met jullie wil delen. Ten eerste: houd een vaste \
routine aan en neem pauzes. Ten tweede: zorg ervoor dat je gereedschap voor jou werkt en niet \
andersom. In dit artikel laat ik zien hoe je een ontwikkelomgeving opzet, hoe je tests schrijft \
die makkelijk te lezen zijn en waarom de beste manier om te leren is om dingen te bouwen die je \
echt nodig hebt. Als je vragen hebt, laat dan gerust een reactie achter. Bedankt voor het lezen \
en nog een fijne dag. Zij waren daar met hun vrienden en zij zei dat hij snel zou komen.";

const SV: &str = "Att utveckla mjukvara är en kreativ och ibland svår verksamhet. När vi \
började med projektet visste vi inte vilket språk vi skulle välja, så vi skrev en liten \
prototyp i vart och ett av dem och jämförde resultaten. De flesta i teamet hade redan arbetat \
med JavaScript, men några av oss ville lära sig något nytt. Att skriva program handlar inte \
bara om kod; det handlar också om människor, om kommunikation och om de vanor som hjälper ett \
team att leverera i tid. Jag har arbetat hemifrån i tre år och det finns saker som jag vill \
dela med er. För det första: håll fast vid en rutin och ta pauser. För det andra: se till att \
dina verktyg arbetar för dig och inte tvärtom. I den här artikeln visar jag hur man sätter upp \
en utvecklingsmiljö, hur man skriver tester som är lätta att läsa och varför det bästa sättet \
att lära sig är att bygga saker som man verkligen behöver. Om du har frågor får du gärna lämna \
en kommentar nedan. Tack för att du läste och ha en fin dag. De var där med sina vänner och hon \
sa att han skulle komma snart. Det är roligt att se hur idéer blir till program.";

const PL: &str = "Tworzenie oprogramowania jest twórczym, a czasem trudnym zajęciem. Kiedy \
zaczynaliśmy projekt, nie wiedzieliśmy, który język wybrać, więc napisaliśmy mały prototyp w \
każdym z nich i porównaliśmy wyniki. Większość zespołu pracowała już wcześniej z JavaScriptem, \
ale niektórzy z nas chcieli nauczyć się czegoś nowego. Pisanie programów to nie tylko kwestia \
kodu; chodzi także o ludzi, o komunikację i o nawyki, które pomagają zespołowi dostarczać na \
czas. Od trzech lat pracuję w domu i jest kilka rzeczy, którymi chciałbym się z wami podzielić. \
Po pierwsze, trzymaj się stałego planu dnia i rób przerwy. Po drugie, upewnij się, że twoje \
narzędzia pracują dla ciebie, a nie odwrotnie. W tym artykule pokażę, jak skonfigurować \
środowisko programistyczne, jak pisać testy, które łatwo czytać, i dlaczego najlepszym \
sposobem nauki jest budowanie rzeczy, których naprawdę potrzebujesz. Jeśli masz pytania, \
zostaw komentarz poniżej. Dziękuję za przeczytanie i życzę miłego dnia. Byli tam ze swoimi \
przyjaciółmi, a ona powiedziała, że on wkrótce przyjdzie.";

const TR: &str = "Yazılım geliştirmek yaratıcı ve bazen zor bir iştir. Projeye başladığımızda \
hangi dili seçeceğimizi bilmiyorduk, bu yüzden her birinde küçük bir prototip yazdık ve \
sonuçları karşılaştırdık. Ekibin çoğu daha önce JavaScript ile çalışmıştı, ama bazılarımız \
yeni bir şey öğrenmek istiyordu. Program yazmak sadece kodla ilgili değildir; aynı zamanda \
insanlarla, iletişimle ve bir ekibin işini zamanında teslim etmesine yardımcı olan \
alışkanlıklarla ilgilidir. Üç yıldır evden çalışıyorum ve sizinle paylaşmak istediğim bazı \
şeyler var. İlk olarak, bir düzen kurun ve mola verin. İkinci olarak, araçlarınızın sizin için \
çalıştığından emin olun, tersi değil. Bu yazıda bir geliştirme ortamının nasıl kurulacağını, \
okunması kolay testlerin nasıl yazılacağını ve öğrenmenin en iyi yolunun neden gerçekten \
ihtiyacınız olan şeyleri yapmak olduğunu göstereceğim. Sorularınız varsa aşağıya bir yorum \
bırakabilirsiniz. Okuduğunuz için teşekkürler, iyi günler dilerim. Arkadaşlarıyla oradaydılar \
ve o yakında geleceğini söyledi.";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_english() {
        assert_eq!(detect_language("The quick brown fox jumps over the lazy dog"), "en");
    }

    #[test]
    fn spanish_sentence() {
        assert_eq!(
            detect_language("El desarrollo de software es divertido y difícil"),
            "es"
        );
    }

    #[test]
    fn degenerate_input_is_undetermined() {
        assert_eq!(detect_language(""), "und");
        assert_eq!(detect_language("   \n\t"), "und");
        assert_eq!(detect_language("1234 5678 !!!"), "und");
    }

    #[test]
    fn deterministic() {
        let text = "Ceci est un petit texte en français pour tester.";
        assert_eq!(detect_language(text), detect_language(text));
    }

    #[test]
    fn profile_ranks_are_dense() {
        let p = TrigramProfile::from_text("aaa aaa bbb", 10);
        assert_eq!(p.len(), 6);
        let q = TrigramProfile::from_text("aaa aaa bbb", 2);
        assert_eq!(q.len(), 2);
    }
}
